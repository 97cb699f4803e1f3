"""RAPTOR-style aerial grasping stack, reconstructed in software.

Subpackages: bus (pub/sub middleware), messages (wire schemas),
trajgen (minimum-jerk planning), simsuite (vehicle + control simulation),
mission (grasp state machine and contact model), lab (experiment harness).
"""

__version__ = "0.1.0"
