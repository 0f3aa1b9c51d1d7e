"""Bell expressions, Tsirelson bounds and exact certificates in the
(2,2,2) scenario: exact Q(sqrt2) arithmetic, the dual-slice octagon,
nullifier bases with Gram certificates, moment relaxations and
qubit-realization scans.
"""

__version__ = "0.1.0"
