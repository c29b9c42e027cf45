"""
Parameter Validation Module
===========================
Declarative validators for experiment parameter blocks in run configs.

Usage:
    from validators import validate_params, EXPERIMENT_VALIDATORS

    params, error = validate_params(block, EXPERIMENT_VALIDATORS["packet"])
    if error:
        raise ConfigError(f"{path}: experiments[{i}].packet: {error}")
    cutoffs = params["cutoffs"]
"""

from dataclasses import dataclass
from typing import Any, Optional, Sequence, Set, Tuple, Union

from config import (
    CLUSTER_EPSILON,
    CLUSTER_SAMPLES,
    DECOUPLING_GROWTH_EXPONENT,
    DECOUPLING_NODES_PER_SIDE,
    DECOUPLING_SAMPLES_PER_UNIT,
    DUALITY_SAMPLES,
    DUALITY_SLACK,
    REFERENCE_FACTOR,
    RESTRICTION_SAMPLES,
    RESTRICTION_TRIALS,
    SHELL_WIDTH,
    WINDOW_FACTOR,
    WINDOW_POINTS,
    WINDOW_TIME_SAMPLES,
)
from norms import parse_exponent

_REQUIRED = object()


@dataclass
class ParamValidator:
    """
    Declarative validator for a single experiment parameter.

    Attributes:
        name: Key in the parameter block
        param_type: Expected type (str, int, float, bool, list, dict, "exponent")
        default: Default value if not provided (_REQUIRED means required)
        valid_values: Set of valid string values (for str type only)
        min_val: Minimum value (for int/float/exponent, and each list item)
        max_val: Maximum value (same)
        item_type: Element type for list parameters
        min_items: Minimum length for list parameters
        error_msg: Custom error message
    """
    name: str
    param_type: Any
    default: Any = _REQUIRED
    valid_values: Optional[Set[str]] = None
    min_val: Optional[Union[int, float]] = None
    max_val: Optional[Union[int, float]] = None
    item_type: Any = None
    min_items: int = 0
    error_msg: Optional[str] = None

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED

    def _convert(self, raw, kind):
        if kind == "exponent":
            return parse_exponent(raw, self.name)
        if kind is bool:
            if not isinstance(raw, bool):
                raise TypeError(f"{self.name} must be true or false")
            return raw
        if kind is int:
            if isinstance(raw, bool) or (isinstance(raw, float) and not raw.is_integer()):
                raise TypeError(f"{self.name} must be an integer")
            return int(raw)
        if kind is float:
            if isinstance(raw, bool):
                raise TypeError(f"{self.name} must be a number")
            return float(raw)
        if kind is str:
            if not isinstance(raw, str):
                raise TypeError(f"{self.name} must be a string")
            return raw
        if kind is dict and not isinstance(raw, dict):
            raise TypeError(f"{self.name} must be an object")
        return raw

    def _check_range(self, value) -> Optional[str]:
        if self.min_val is not None and value < self.min_val:
            return self.error_msg or f"{self.name} must be >= {self.min_val}, got {value}"
        if self.max_val is not None and value > self.max_val:
            return self.error_msg or f"{self.name} must be <= {self.max_val}, got {value}"
        return None

    def validate(self, args: dict) -> Tuple[Optional[Any], Optional[str]]:
        """
        Validate a parameter from a config block.

        Returns:
            (value, None) on success
            (None, message) on error
        """
        if self.name not in args or args[self.name] is None:
            if self.required:
                return None, f"missing required parameter '{self.name}'"
            return self.default, None
        raw = args[self.name]

        try:
            if self.param_type is list:
                if not isinstance(raw, list):
                    raise TypeError(f"{self.name} must be a list")
                value = [self._convert(item, self.item_type) for item in raw] if self.item_type else list(raw)
            else:
                value = self._convert(raw, self.param_type)
        except (ValueError, TypeError) as exc:
            kind = getattr(self.param_type, "__name__", self.param_type)
            return None, self.error_msg or f"'{self.name}' must be a valid {kind}: {exc}"

        if self.valid_values and value not in self.valid_values:
            options = ", ".join(f"'{v}'" for v in sorted(self.valid_values))
            return None, self.error_msg or f"{self.name} must be one of: {options}, got '{value}'"

        if self.param_type is list:
            if len(value) < self.min_items:
                return None, f"{self.name} needs at least {self.min_items} entries, got {len(value)}"
            if self.item_type in (int, float, "exponent"):
                for item in value:
                    error = self._check_range(item)
                    if error:
                        return None, error
        elif self.param_type in (int, float, "exponent"):
            error = self._check_range(value)
            if error:
                return None, error

        return value, None


def validate_params(
    args: dict,
    validators: Sequence[ParamValidator],
    allow_unknown: bool = False,
) -> Tuple[dict, Optional[str]]:
    """
    Validate multiple parameters at once.

    Returns:
        (params_dict, None) on success
        ({}, message) on the first error; unknown keys are errors unless allowed
    """
    if not allow_unknown:
        known = {v.name for v in validators}
        unknown = sorted(set(args) - known)
        if unknown:
            return {}, f"unknown parameter(s): {', '.join(unknown)}"
    result = {}
    for v in validators:
        value, error = v.validate(args)
        if error:
            return {}, error
        result[v.name] = value
    return result, None


# ═══════════════════════════════════════════════════════════════════════════════
# SHARED VALIDATORS
# Parameters common to several experiments
# ═══════════════════════════════════════════════════════════════════════════════

def dimension_validator(max_dim: int = 3) -> ParamValidator:
    """Create a d validator capped at max_dim."""
    return ParamValidator(name="d", param_type=int, min_val=1, max_val=max_dim,
                          error_msg=f"d must be between 1 and {max_dim}")


D_ANY = dimension_validator(3)
D_LOW = dimension_validator(2)

ALPHA = ParamValidator(name="alpha", param_type=float, default=2.0, min_val=0.0)
P_EXP = ParamValidator(name="p", param_type="exponent", min_val=1.0)
Q_EXP = ParamValidator(name="q", param_type="exponent", min_val=1.0)
SEED = ParamValidator(name="seed", param_type=int, default=None, min_val=0)
PROPAGATOR = ParamValidator(name="propagator", param_type=dict, default=None)
INTERVAL = ParamValidator(name="interval", param_type=list, default=[0.0, 1.0], item_type=float, min_items=2)


def cutoffs_validator(name: str = "cutoffs", item_type=int, min_items: int = 1) -> ParamValidator:
    return ParamValidator(name=name, param_type=list, item_type=item_type, min_val=0, min_items=min_items)


CUTOFFS = cutoffs_validator()


# ═══════════════════════════════════════════════════════════════════════════════
# PER-EXPERIMENT PARAMETER SETS
# ═══════════════════════════════════════════════════════════════════════════════

EXPERIMENT_VALIDATORS: dict[str, list[ParamValidator]] = {
    "packet": [
        D_ANY, ALPHA, P_EXP, Q_EXP, CUTOFFS, PROPAGATOR,
        ParamValidator(name="normalized", param_type=bool, default=True),
        ParamValidator(name="window_factor", param_type=float, default=WINDOW_FACTOR, min_val=0.0),
        ParamValidator(name="space_points", param_type=int, default=WINDOW_POINTS, min_val=2),
        ParamValidator(name="time_samples", param_type=int, default=WINDOW_TIME_SAMPLES, min_val=2),
        ParamValidator(name="interval_scaling", param_type=str, default="unit", valid_values={"unit", "rescaled"}),
    ],
    "weyl_saturation": [
        D_ANY, P_EXP, Q_EXP, CUTOFFS, PROPAGATOR, INTERVAL,
        ParamValidator(name="weight", param_type=float, default=1.0),
        ParamValidator(name="time_samples", param_type=int, default=9, min_val=1),
        ParamValidator(name="space_points", param_type=int, default=None, min_val=1),
    ],
    "shell_eigenfunction": [
        D_ANY, Q_EXP, CUTOFFS,
        ParamValidator(name="window_factor", param_type=float, default=WINDOW_FACTOR, min_val=0.0),
        ParamValidator(name="space_points", param_type=int, default=WINDOW_POINTS, min_val=2),
    ],
    "torus_cluster": [
        D_ANY, ALPHA, PROPAGATOR,
        cutoffs_validator("j_values", float),
        ParamValidator(name="c", param_type=float, default=SHELL_WIDTH, min_val=0.0),
        ParamValidator(name="epsilon", param_type=float, default=CLUSTER_EPSILON, min_val=0.0),
        ParamValidator(name="samples", param_type=int, default=CLUSTER_SAMPLES, min_val=1),
    ],
    "zonal_sphere": [
        P_EXP, Q_EXP, CUTOFFS, INTERVAL,
        ParamValidator(name="check_degrees", param_type=int, default=128, min_val=0),
    ],
    "universal_bound": [
        D_ANY, P_EXP, Q_EXP, CUTOFFS, PROPAGATOR, INTERVAL, SEED,
        ParamValidator(name="states", param_type=int, default=None, min_val=1),
        ParamValidator(name="time_samples", param_type=int, default=5, min_val=1),
    ],
    "torus_strichartz": [
        D_ANY, ALPHA, Q_EXP, CUTOFFS, SEED,
        ParamValidator(name="p", param_type="exponent", default=None, min_val=1.0),
        ParamValidator(name="profile", param_type=str, default="ones", valid_values={"ones", "random_phase"}),
        ParamValidator(name="time_samples", param_type=int, default=None, min_val=1),
    ],
    "decoupling": [
        D_LOW, ALPHA, P_EXP, SEED,
        cutoffs_validator("deltas", float),
        ParamValidator(name="density", param_type=str, default="constant",
                       valid_values={"constant", "random_phase", "single_cube"}),
        ParamValidator(name="growth_exponent", param_type=float, default=DECOUPLING_GROWTH_EXPONENT, min_val=0.0),
        ParamValidator(name="nodes_per_side", param_type=int, default=DECOUPLING_NODES_PER_SIDE, min_val=1),
        ParamValidator(name="samples_per_unit", param_type=float, default=DECOUPLING_SAMPLES_PER_UNIT, min_val=0.0),
    ],
    "discrete_restriction": [
        D_LOW, ALPHA, P_EXP, CUTOFFS, SEED,
        ParamValidator(name="radius", param_type=float, default=None, min_val=0.0),
        ParamValidator(name="trials", param_type=int, default=RESTRICTION_TRIALS, min_val=1),
        ParamValidator(name="samples", param_type=int, default=RESTRICTION_SAMPLES, min_val=1),
    ],
    "duality_probe": [
        P_EXP, Q_EXP, SEED,
        ParamValidator(name="beta", param_type="exponent", min_val=1.0),
        ParamValidator(name="inputs", param_type=int, default=8, min_val=1),
        ParamValidator(name="rows", param_type=int, default=16, min_val=1),
        ParamValidator(name="time_points", param_type=int, default=4, min_val=1),
        ParamValidator(name="instances", param_type=int, default=200, min_val=1),
        ParamValidator(name="samples", param_type=int, default=DUALITY_SAMPLES, min_val=1),
        ParamValidator(name="slack", param_type=float, default=DUALITY_SLACK, min_val=0.0),
    ],
}

# Keys every experiment descriptor may carry next to its parameters
DESCRIPTOR_VALIDATORS = [
    ParamValidator(name="name", param_type=str, valid_values=set(EXPERIMENT_VALIDATORS)),
    ParamValidator(name="params", param_type=dict, default={}),
    ParamValidator(name="expected_slope", param_type=None, default=None),
    ParamValidator(name="tolerance", param_type=float, default=None, min_val=0.0),
    ParamValidator(name="comparison", param_type=str, default=None, valid_values={"two_sided", "upper"}),
]

HARTREE_VALIDATORS = [
    ParamValidator(name="states", param_type=list, min_items=1),
    ParamValidator(name="weights", param_type=list, default=None, item_type=float, min_val=0.0),
    ParamValidator(name="t0", param_type=float, default=0.0),
    ParamValidator(name="potential", param_type=dict, default={"kind": "zero"}),
    ParamValidator(name="propagator", param_type=dict, default={}),
    ParamValidator(name="solver", param_type=dict),
    ParamValidator(name="convergence", param_type=bool, default=False),
    ParamValidator(name="reference_factor", param_type=int, default=REFERENCE_FACTOR, min_val=2),
    ParamValidator(name="snapshots", param_type=bool, default=False),
    ParamValidator(name="output_dir", param_type=str, default=None),
]
