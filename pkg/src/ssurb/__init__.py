"""Self-stabilizing quiescent uniform reliable broadcast.

A deterministic protocol state machine, a seeded discrete-event network
simulator with benign and transient fault injection, and trace-level
checkers for the broadcast guarantees (validity, integrity, termination),
quiescence, buffer bounds, FIFO delivery, stabilization time and message
cost.
"""

__version__ = "0.1.0"
