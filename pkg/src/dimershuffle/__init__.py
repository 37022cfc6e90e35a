"""Domino shuffling growth process on the torus with two-periodic weights."""

from .lattice import (
    DimerConfig,
    TorusLattice,
    build_torus,
    brick_config,
    elementary_rotation,
    enumerate_matchings,
    height_gradient,
    matchings_by_sector,
    staircase_config,
    winding_numbers,
)
from .weights import ModelParams, WeightField, creation_probabilities, face_delta, spider_step, two_periodic_init
from .shuffle import RngStream, ShuffleDynamics, TrackedState, apply_F, apply_T, evolve, step_with_height

__version__ = "0.1.0"
