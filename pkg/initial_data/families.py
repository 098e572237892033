import logging

import numpy as np

from geometry.coordinates import CoordinateMap
from geometry.models import SpacetimeModel
from initial_data.exceptions import (
    BifurcationSphereSupport,
    GridMismatch,
    JunctionMismatch,
    ModeMismatch,
    SupportOutsideGrid,
)
from initial_data.models import (
    CharacteristicData,
    FoliationKind,
    FoliationSpec,
    MixedSurfaceData,
    TailParameters,
)
from initial_data.profiles import (
    BumpProfile,
    CombinedProfile,
    SpacelikeBump,
    TailProfile,
)

logger = logging.getLogger(__name__)


def make_foliation(kind: str, cmap: CoordinateMap) -> FoliationSpec:
    return FoliationSpec(kind=FoliationKind(kind).value, cmap=cmap)


def bump_data(
    cmap: CoordinateMap,
    v_center: float,
    width: float,
    amplitude: float,
    ell: int = 0,
    v_max: float = np.inf,
) -> CharacteristicData:
    v0 = 2.0 * cmap.model.reference_radius
    if width <= 0:
        raise SupportOutsideGrid(f"bump width must be positive, got {width}")
    if not v0 < v_center - width:
        raise SupportOutsideGrid(
            f"bump starts at v = {v_center - width}, not after v0 = {v0}"
        )
    if not v_center + width < v_max:
        raise SupportOutsideGrid(
            f"bump ends at v = {v_center + width}, beyond v_max = {v_max}"
        )
    profile = BumpProfile(
        cmap=cmap,
        support=(v_center - width, v_center + width),
        center=v_center,
        width=width,
        amplitude=amplitude,
    )
    return CharacteristicData(
        profile=profile,
        ell=ell,
        v_max=v_max,
        label=f"bump(vc={v_center:g}, w={width:g}, A={amplitude:g})",
    )


def tail_data(
    cmap: CoordinateMap,
    I0_target: float,
    p_coeffs=(),
    beta: float = 1.0,
    ell: int = 0,
    phi_vertex: float = 0.0,
    v_max: float = np.inf,
) -> CharacteristicData:
    p_coeffs = tuple(float(p) for p in p_coeffs)
    profile = TailProfile(
        cmap=cmap,
        I0=float(I0_target),
        p_coeffs=p_coeffs,
        phi_vertex=float(phi_vertex),
    )
    return CharacteristicData(
        profile=profile,
        ell=ell,
        v_max=v_max,
        tail=TailParameters(float(I0_target), p_coeffs, float(beta)),
        label=f"tail(I0={I0_target:g}, p={list(p_coeffs)})",
    )


def same_background(a: SpacetimeModel, b: SpacetimeModel) -> bool:
    if a is b:
        return True
    return (
        a.kind == b.kind
        and a.mass == b.mass
        and a.charge == b.charge
        and a.reference_radius == b.reference_radius
        and a.custom is b.custom
    )


def superpose(
    a: float,
    data_A: CharacteristicData,
    b: float,
    data_B: CharacteristicData,
) -> CharacteristicData:
    if data_A.ell != data_B.ell:
        raise ModeMismatch(
            f"cannot superpose l = {data_A.ell} with l = {data_B.ell}"
        )
    if not same_background(data_A.model, data_B.model):
        raise GridMismatch("data live on different backgrounds")
    if data_A.v_max != data_B.v_max:
        raise GridMismatch(
            f"sample extents differ: {data_A.v_max} vs {data_B.v_max}"
        )

    support = None
    if data_A.is_compact and data_B.is_compact:
        support = (
            min(data_A.support[0], data_B.support[0]),
            max(data_A.support[1], data_B.support[1]),
        )
    tail = None
    if data_A.tail is not None and data_B.tail is not None:
        pa, pb = data_A.tail.p_coeffs, data_B.tail.p_coeffs
        n = max(len(pa), len(pb))
        pa = pa + (0.0,) * (n - len(pa))
        pb = pb + (0.0,) * (n - len(pb))
        tail = TailParameters(
            a * data_A.tail.I0_target + b * data_B.tail.I0_target,
            tuple(a * x + b * y for x, y in zip(pa, pb)),
            min(data_A.tail.beta, data_B.tail.beta),
        )
    profile = CombinedProfile(
        cmap=data_A.cmap,
        support=support,
        terms=((float(a), data_A.profile), (float(b), data_B.profile)),
    )
    return CharacteristicData(
        profile=profile,
        ell=data_A.ell,
        v_max=data_A.v_max,
        tail=tail,
        label=f"{a:g}*[{data_A.label}] + {b:g}*[{data_B.label}]",
    )


def mixed_data(
    foliation: FoliationSpec,
    spacelike: SpacelikeBump,
    cone: CharacteristicData,
) -> MixedSurfaceData:
    model = cone.model
    R = model.reference_radius
    if not same_background(foliation.model, model):
        raise GridMismatch("foliation and cone data use different models")

    junction = float(spacelike.phi(R)) - float(cone.phi_r(R))
    if abs(junction) > 1e-12 * max(1.0, cone.scale):
        raise JunctionMismatch(
            f"spacelike and cone values differ by {junction:.3e} at r = R"
        )
    low, high = spacelike.support
    if low < model.r_min or high > R:
        raise JunctionMismatch(
            f"spacelike support [{low:g}, {high:g}] leaves "
            f"[{model.r_min:g}, {R:g}]"
        )
    static_case_one = (
        foliation.kind == FoliationKind.STATIC and model.is_black_hole
    )
    if static_case_one and low <= model.r_plus:
        raise BifurcationSphereSupport(
            "data on the static slice must vanish near r_+ "
            f"(support starts at {low:g}, r_+ = {model.r_plus:g})"
        )

    data = MixedSurfaceData(
        foliation=foliation, spacelike=spacelike, cone=cone
    )
    logger.info(
        "Mixed data on %s foliation, spacelike support [%g, %g]",
        foliation.kind,
        low,
        high,
    )
    return data


def zero_spacelike(model: SpacetimeModel) -> SpacelikeBump:
    R = model.reference_radius
    return SpacelikeBump(
        center=0.5 * (model.r_min + R), width=0.25 * (R - model.r_min)
    )
