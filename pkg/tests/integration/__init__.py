"""Integration tests for components working together as a system.

No mocks for core functionality: real subcommands, real files.

Coverage:
    - run / check / tables end to end with exit codes and manifests
    - Full training and discovery reproductions (marked slow)
"""
