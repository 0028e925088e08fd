"""
Modules in this directory implement the oamsim subcommands, one per module.
"""
