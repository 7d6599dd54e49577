"""Model-file DSL, task runner and output emitters behind the ``jetham`` command."""
