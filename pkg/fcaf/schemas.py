"""JSON wire models for functions, measures, profiles and aggregator specs."""
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PieceSpec(_Strict):
    coeffs: list[float] = Field(min_length=1)


class AtomSpec(_Strict):
    point: float
    value: float


class PiecewiseFnSpec(_Strict):
    breakpoints: list[float] = Field(min_length=2)
    pieces: list[PieceSpec] = Field(min_length=1)
    atoms: list[AtomSpec] = Field(default_factory=list)


class MassSpec(_Strict):
    point: float
    mass: float


class MeasureSpec(_Strict):
    density: PiecewiseFnSpec
    masses: list[MassSpec] = Field(default_factory=list)


class ObjectSpec(_Strict):
    types: list[PiecewiseFnSpec] = Field(min_length=2)


class ProfileSpec(_Strict):
    m: int = Field(ge=2)
    p: int = Field(ge=2)
    objects: list[ObjectSpec]


Shape = Optional[tuple[int, int]]


class WeightedMeanSpec(_Strict):
    kind: Literal["weighted_mean"]
    measure: MeasureSpec
    shape: Shape = None


class DictatorSpec(_Strict):
    kind: Literal["dictator"]
    i: float = Field(ge=0.0, le=1.0)
    shape: Shape = None


class NonOptimalSpec(_Strict):
    kind: Literal["prop2_nonoptimal", "vertex_or_uniform"]
    shape: Shape = None


class NonIndependentSpec(_Strict):
    kind: Literal["prop2_nonindependent", "lean_switch"]
    shape: Shape = None


class NonZeroUnanimousSpec(_Strict):
    kind: Literal["prop2_nonzerounanimous", "swapped_dictator"]
    shape: Shape = None


class OddHMeanSpec(_Strict):
    kind: Literal["odd_h_mean"]
    variant: Literal["linear", "cube"]
    measure: Optional[MeasureSpec] = None
    shape: Shape = None


class PerTypeMeanSpec(_Strict):
    kind: Literal["per_type_mean"]
    measures: list[MeasureSpec] = Field(min_length=1)
    shape: Shape = None


AggregatorSpec = Annotated[
    Union[
        WeightedMeanSpec,
        DictatorSpec,
        NonOptimalSpec,
        NonIndependentSpec,
        NonZeroUnanimousSpec,
        OddHMeanSpec,
        PerTypeMeanSpec,
    ],
    Field(discriminator="kind"),
]


AGGREGATOR_ADAPTER = TypeAdapter(AggregatorSpec)
