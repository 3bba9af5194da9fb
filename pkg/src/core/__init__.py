"""
Core package for fitzkit.
Convex representations of monotone operators: conjugation, Fitzpatrick functions,
the representability gate and the statement checkers.
"""
