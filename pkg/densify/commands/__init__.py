"""
One module per subcommand.  ``densify.main`` imports ``densify.commands.<name>``
and uses its ``COMMAND_CLASS`` or, failing that, ``<CamelCase>Command``.
"""
