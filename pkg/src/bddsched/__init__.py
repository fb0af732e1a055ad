"""Exact solver for Pm||sum w_j T_j based on a decision-diagram flow model."""
from .instance import (Instance, Job, Schedule, evaluate_schedule, generate_instance,
                       horizon_length, parse_instance, read_instance, write_instance)
from .horizon import Partition, base_partition, check_appropriate, refine_partition
from .diagram import Diagram, build_diagram, diagram_stats, enumerate_paths

__all__ = [
    "Instance", "Job", "Schedule", "evaluate_schedule", "generate_instance",
    "horizon_length", "parse_instance", "read_instance", "write_instance",
    "Partition", "base_partition", "check_appropriate", "refine_partition",
    "Diagram", "build_diagram", "diagram_stats", "enumerate_paths",
]
