"""cokb: a collaborative knowledge-base engine and server.

Users add terms and statements in a controlled notation; the engine
detects partial redundancy and inconsistency by graph matching over an
extended specialization hierarchy, rejects implicit conflicts, clones
terms on definitional conflicts, and accepts loss-less corrections via
corrective relations.
"""

__version__ = "0.1.0"
