"""gaitscope - skeleton gait and gesture analysis for autism screening research."""

__version__ = "0.1.0"
