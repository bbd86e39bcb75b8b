"""
memograph: persist reasoning workflows as labeled DAGs and stitch new task plans from
retrieved subgraphs under a cost and inconsistency objective.
"""
from memograph.constants import VERSION

__version__ = VERSION
