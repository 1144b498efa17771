"""Coefficient field factory."""

from typing import Any, Dict, List, Type

from chgsim.core.exceptions import ConfigError, NotFoundError
from chgsim.core.logger import logger
from chgsim.services.coefficients.base import (
    CoefficientMode,
    CoefficientSet,
    FrozenCoefficients,
    ScalarField,
    VectorField,
)
from chgsim.services.coefficients.scalar import BumpScalar, ConstantScalar, SaturatingScalar
from chgsim.services.coefficients.vector import (
    ConstantVector,
    LinearVector,
    ModulatedVortexField,
    RotationField,
    ShearField,
    SineVector,
    VortexField,
)

SCALAR_FIELDS: Dict[str, Type[ScalarField]] = {
    "constant": ConstantScalar,
    "bump": BumpScalar,
    "saturating": SaturatingScalar,
}

VECTOR_FIELDS: Dict[str, Type[VectorField]] = {
    "constant": ConstantVector,
    "linear": LinearVector,
    "rotation": RotationField,
    "shear": ShearField,
    "sine": SineVector,
    "vortex": VortexField,
    "modulated_vortex": ModulatedVortexField,
}


def _build(registry: str, table: Dict[str, Type[Any]], name: str, params: Dict[str, Any]) -> Any:
    if name not in table:
        raise NotFoundError(registry, name, sorted(table))
    try:
        instance = table[name](**params)
    except TypeError as exc:
        raise ConfigError(
            f"invalid parameters for {registry} built-in '{name}'",
            [{"key": name, "message": str(exc)}],
        ) from exc
    logger.debug("Built coefficient field", registry=registry, field=instance.describe())
    return instance


def get_scalar_field(name: str, **params: Any) -> ScalarField:
    """
    Get a scalar field instance from the registry.

    Args:
        name: registered built-in name
        **params: constructor parameters of the built-in

    Returns:
        ScalarField instance
    """
    return _build("scalar field", SCALAR_FIELDS, name, params)


def get_vector_field(name: str, **params: Any) -> VectorField:
    """
    Get a vector field instance from the registry.

    Args:
        name: registered built-in name
        **params: constructor parameters of the built-in

    Returns:
        VectorField instance
    """
    return _build("vector field", VECTOR_FIELDS, name, params)


def available_fields() -> Dict[str, List[str]]:
    return {"scalar": sorted(SCALAR_FIELDS), "vector": sorted(VECTOR_FIELDS)}


__all__ = [
    "CoefficientMode",
    "CoefficientSet",
    "FrozenCoefficients",
    "ScalarField",
    "VectorField",
    "get_scalar_field",
    "get_vector_field",
    "available_fields",
]
