"""Domain package.

Dataclasses shared by the estimation modules, the CLI and the tests.
"""
