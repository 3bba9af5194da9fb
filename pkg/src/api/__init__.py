"""
Report models shared by the core checkers and the CLI.
"""
