"""Feasibility and stability of DC grids with constant power loads."""

import json

import numpy as np

from ._core import (
    GridModel,
    GridfeasError,
    classify_point,
    demand_of,
    dissipation,
    enumerate_solutions,
    grid_from_json,
    h_of,
    halfspace_value,
    jacobian,
    load_grid,
    p_max,
    param_to_voltage,
    perron,
    phi,
    ray_boundary,
    solve_single_load,
    voltage_to_param,
)
from . import _core

__all__ = [
    "GridModel",
    "GridfeasError",
    "analyze",
    "assemble_lmi",
    "boundary_scan",
    "certify",
    "classify_point",
    "demand_of",
    "dissipation",
    "enumerate_solutions",
    "grid_from_dict",
    "grid_from_json",
    "h_of",
    "halfspace_value",
    "jacobian",
    "load_grid",
    "p_max",
    "param_to_voltage",
    "perron",
    "phi",
    "ray_boundary",
    "solve",
    "solve_single_load",
    "verify_report",
    "voltage_to_param",
]


def _vec(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def grid_from_dict(doc, allow_reducible=False):
    return grid_from_json(json.dumps(doc), allow_reducible)


def solve(grid, demand):
    """Verdict dict with kind Interior, Boundary or Infeasible."""
    return json.loads(_core.solve_json(grid, _vec(demand)))


def analyze(grid, demand, tol=1e-9, trace=False, oracle=False):
    return json.loads(_core.analyze_json(grid, _vec(demand), tol, trace, oracle))


def assemble_lmi(grid, nu, demand):
    return json.loads(_core.assemble_lmi(grid, _vec(nu), _vec(demand)))


def certify(grid, demand):
    """LMI certificate dict, or None when the demand is interior."""
    text = _core.certify_json(grid, _vec(demand))
    return None if text is None else json.loads(text)


def boundary_scan(grid, rays=256, tails=0):
    return json.loads(_core.boundary_json(grid, rays, tails))


def verify_report(report):
    """List of (check, passed, detail) for a report dict or JSON string."""
    text = report if isinstance(report, str) else json.dumps(report)
    return _core.verify_report(text)
