import logging

from initial_data.models import MixedSurfaceData
from np_constants.closed_forms import (
    estimate_I0,
    inversion_terms,
    static_slice_I0_inverted,
    time_inverted_I0,
    vanishes,
)
from np_constants.exceptions import InapplicableFormula
from np_constants.models import Estimate, Method, NpEntry, NpReport
from time_integral.construction import iterate_time_integral

logger = logging.getLogger(__name__)


def time_inverted_I0_kth(data, foliation=None, k: int = 1) -> NpReport:
    """I0^(1) .. I0^(k), each checked against the constructed field.

    Every level needs the previous constant to vanish; a failure raises
    PreconditionChainBroken naming the order that did not.
    """
    return chain_report(data, iterate_time_integral(data, foliation, k=k))


def chain_report(data, chain) -> NpReport:
    """The NpReport of an already constructed time-integral chain."""
    entries = [
        NpEntry(
            k=tdata.order,
            value=tdata.closed_form.value,
            error=tdata.closed_form.error,
            method=Method.BOTH,
            closed_form=tdata.closed_form,
            constructed=tdata.extracted.estimate(Method.CONSTRUCTED_LIMIT),
            agreement=tdata.agreement,
            expansion=tdata.extracted.coefficients[1:],
        )
        for tdata in chain
    ]
    for entry in entries:
        logger.info(
            "I0^(%d) = %.16g, constructed %.16g",
            entry.k,
            entry.value,
            entry.constructed.value,
        )
    return NpReport(I0=estimate_I0(data), C0=chain[0].C0, inverted=entries)


def build_report(
    data, foliation=None, order: int = 1, construct: bool = False
) -> NpReport:
    """The NpReport of the ``constants`` command.

    With a nonvanishing I0 only I0 itself is reported. ``construct`` builds
    the time integrals and reports both oracles for every order.
    """
    I0 = estimate_I0(data)
    if order < 1 or not vanishes(I0, data.scale):
        return NpReport(I0=I0)
    if construct or order > 1:
        return time_inverted_I0_kth(data, foliation, k=order)
    C0, c3fit = inversion_terms(data, foliation)
    M = data.model.mass
    inverted = Estimate(
        value=-c3fit.value + M * C0.value,
        error=c3fit.error + M * C0.error,
    )
    entry = NpEntry(
        k=1,
        value=inverted.value,
        error=inverted.error,
        method=Method.CLOSED_FORM,
        closed_form=inverted,
    )
    return NpReport(I0=I0, C0=C0, inverted=[entry])


def static_slice_remark(data) -> dict | None:
    """The static-slice oracle beside the general closed form, when the
    data live on the static slice only."""
    if not isinstance(data, MixedSurfaceData):
        return None
    try:
        static = static_slice_I0_inverted(data)
    except InapplicableFormula:
        return None
    general = time_inverted_I0(data)
    return {
        "static_slice": static.value,
        "closed_form": general.value,
        "difference": abs(static.value - general.value),
    }
