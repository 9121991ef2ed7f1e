"""Online joint routing and scheduling for time-triggered Ethernet.

Admission works on a time-slot expanded graph: one vertex per (node,
slot), transmission edges whose availability and dynamic weight track the
periods they can still serve, and implicit caching/wrap-around edges.
Each arriving periodic flow gets the minimum-weight feasible path so that
the harm to future flows is minimized.
"""

__version__ = "0.1.0"
