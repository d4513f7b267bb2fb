"""Decline-curve producers with logistic water breakthrough.

Each well produces oil at q0 * exp(-a t); the water cut follows
wmax / (1 + exp(-b (t - t_bt))) and water = oil * cut / (1 - cut).
Optional water injectors replace the produced liquid, each scaled by its own
voidage-replacement ratio.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import DataError
from src.models.ensemble import EnsembleMatrix, Observations
from src.models.schemas import DataElement, DataKind, DataLayout

DAYS_PER_STEP = 30.0
FIELD_SIZE = 5000.0

Q0_MEDIAN = 800.0
Q0_LOG_STD = 0.25
DECLINE_MEDIAN = 1.0 / 1500.0
DECLINE_LOG_STD = 0.25
BREAKTHROUGH_MEDIAN = 500.0
BREAKTHROUGH_STD = 80.0
BREAKTHROUGH_MIN = DAYS_PER_STEP
WMAX_MEAN = 0.75
WMAX_STD = 0.05
WMAX_BOUNDS = (0.05, 0.9)
LOGISTIC_RATE = 0.012
VRR_LOG_STD = 0.1

# Standard normal 99th percentile, used for the biased reference.
BIAS_Z = 2.326
NOISE_FLOOR = 1e-6


@dataclass(frozen=True)
class DeclineParameters:
    """Per-well parameters, arrays of shape (n_wells, n_realizations)."""

    q0: np.ndarray
    decline: np.ndarray
    breakthrough: np.ndarray
    wmax: np.ndarray

    @classmethod
    def from_normal_scores(cls, z: np.ndarray) -> "DeclineParameters":
        """Map standard normal scores of shape (4, n_wells, n) to parameters."""
        return cls(
            q0=Q0_MEDIAN * np.exp(Q0_LOG_STD * z[0]),
            decline=DECLINE_MEDIAN * np.exp(DECLINE_LOG_STD * z[1]),
            breakthrough=np.maximum(
                BREAKTHROUGH_MEDIAN + BREAKTHROUGH_STD * z[2], BREAKTHROUGH_MIN
            ),
            wmax=np.clip(WMAX_MEAN + WMAX_STD * z[3], *WMAX_BOUNDS),
        )


@dataclass(frozen=True)
class DeclineCurveCase:
    """Prior ensemble, noisy history and the hidden reference of a decline field."""

    prior: EnsembleMatrix
    observations: Observations
    reference: np.ndarray
    reference_parameters: DeclineParameters
    history_cut: int
    noise_frac: float

    @property
    def layout(self) -> DataLayout:
        return self.prior.layout


def time_grid(n_steps: int) -> np.ndarray:
    return DAYS_PER_STEP * np.arange(1, n_steps + 1)


def simulate(params: DeclineParameters, times: np.ndarray) -> tuple:
    """Oil and water rates of shape (n_wells, n_steps, n)."""
    t = times[None, :, None]
    oil = params.q0[:, None, :] * np.exp(-params.decline[:, None, :] * t)
    cut = params.wmax[:, None, :] / (
        1.0 + np.exp(-LOGISTIC_RATE * (t - params.breakthrough[:, None, :]))
    )
    water = oil * cut / (1.0 - cut)
    return oil, water


def simulate_injection(vrr: np.ndarray, oil: np.ndarray, water: np.ndarray) -> np.ndarray:
    """Injection rates of shape (n_injectors, n_steps, n) from field liquid production."""
    liquid = (oil + water).sum(axis=0)
    return vrr[:, None, :] * liquid[None, :, :] / vrr.shape[0]


def _stack(oil: np.ndarray, water: np.ndarray) -> np.ndarray:
    """Order rows well by well: oil steps, then water steps."""
    per_well = np.concatenate([oil, water], axis=1)
    return per_well.reshape(-1, per_well.shape[-1])


def decline_layout(
    coordinates: np.ndarray,
    n_steps: int,
    history_cut: int,
    noise_std: np.ndarray,
    injector_coordinates: Optional[np.ndarray] = None,
) -> DataLayout:
    """Producers P1.. (oil then water rates), then injectors I1.. (injection rates)."""
    times = time_grid(n_steps)
    wells = [
        (f"P{w + 1}", x, y, (DataKind.OIL_RATE, DataKind.WATER_RATE))
        for w, (x, y) in enumerate(coordinates)
    ]
    if injector_coordinates is not None:
        wells += [
            (f"I{w + 1}", x, y, (DataKind.INJECTION_RATE,))
            for w, (x, y) in enumerate(injector_coordinates)
        ]
    elements = []
    row = 0
    for well_id, x, y, kinds in wells:
        for kind in kinds:
            for k, t in enumerate(times):
                is_history = k < history_cut
                elements.append(
                    DataElement(
                        id=f"{well_id}:{kind.value}:{k + 1:03d}",
                        well_id=well_id,
                        x=float(x),
                        y=float(y),
                        time=float(t),
                        kind=kind,
                        is_history=is_history,
                        noise_std=float(noise_std[row]) if is_history else None,
                    )
                )
                row += 1
    return DataLayout(elements=elements)


def build_decline_case(
    n_wells: int = 4,
    n_members: int = 200,
    history_cut: int = 24,
    noise_frac: float = 0.1,
    rng_seed: int = 0,
    biased: bool = False,
    n_steps: int = 60,
    n_injectors: int = 0,
) -> DeclineCurveCase:
    """Simulate a reference field, its noisy history and a prior ensemble.

    Args:
        n_wells: Number of producers
        n_members: Prior ensemble size
        history_cut: Number of monthly steps observed, strictly inside the grid
        noise_frac: Observation error std as a fraction of the true value
        rng_seed: Seed of every random draw in the case
        biased: Put the reference at the prior's 99th percentile of production
        n_steps: Length of the monthly time grid
        n_injectors: Water injectors appended after the producers

    Returns:
        DeclineCurveCase
    """
    if not 0 < history_cut < n_steps:
        raise DataError(
            f"history_cut must lie strictly inside the {n_steps}-step grid, got {history_cut}"
        )
    if n_wells < 1 or n_members < 2 or n_injectors < 0:
        raise DataError("need at least one well, two members and no negative injector count")
    if noise_frac < 0:
        raise DataError("noise_frac must be non-negative")

    coord_ss, ref_ss, prior_ss, noise_ss, inj_ss = np.random.SeedSequence(rng_seed).spawn(5)
    coordinates = np.random.default_rng(coord_ss).uniform(0.0, FIELD_SIZE, (n_wells, 2))
    times = time_grid(n_steps)

    if biased:
        signs = np.array([1.0, -1.0, -1.0, 1.0])
        z_ref = np.broadcast_to(BIAS_Z * signs[:, None, None], (4, n_wells, 1))
    else:
        z_ref = np.random.default_rng(ref_ss).standard_normal((4, n_wells, 1))
    reference_parameters = DeclineParameters.from_normal_scores(np.array(z_ref))
    z_prior = np.random.default_rng(prior_ss).standard_normal((4, n_wells, n_members))
    reference_rates = simulate(reference_parameters, times)
    member_rates = simulate(DeclineParameters.from_normal_scores(z_prior), times)
    reference = _stack(*reference_rates)[:, 0]
    members = _stack(*member_rates)

    injector_coordinates = None
    if n_injectors:
        inj_coord_ss, inj_ref_ss, inj_prior_ss = inj_ss.spawn(3)
        injector_coordinates = np.random.default_rng(inj_coord_ss).uniform(
            0.0, FIELD_SIZE, (n_injectors, 2)
        )
        if biased:
            z_vrr_ref = np.full((n_injectors, 1), BIAS_Z)
        else:
            z_vrr_ref = np.random.default_rng(inj_ref_ss).standard_normal((n_injectors, 1))
        z_vrr = np.random.default_rng(inj_prior_ss).standard_normal((n_injectors, n_members))
        ref_injection = simulate_injection(np.exp(VRR_LOG_STD * z_vrr_ref), *reference_rates)
        injection = simulate_injection(np.exp(VRR_LOG_STD * z_vrr), *member_rates)
        reference = np.concatenate([reference, ref_injection.reshape(-1)])
        members = np.vstack([members, injection.reshape(-1, n_members)])

    sigma_min = NOISE_FLOOR * np.max(np.abs(reference))
    noise_std = np.maximum(noise_frac * np.abs(reference), sigma_min)
    layout = decline_layout(coordinates, n_steps, history_cut, noise_std, injector_coordinates)
    history = layout.history_indices
    noise = np.random.default_rng(noise_ss).standard_normal(history.size)
    d_obs = reference[history] + noise_std[history] * noise

    return DeclineCurveCase(
        prior=EnsembleMatrix(data=members, layout=layout),
        observations=Observations.for_layout(layout, d_obs, noise_std[history]),
        reference=reference,
        reference_parameters=reference_parameters,
        history_cut=history_cut,
        noise_frac=noise_frac,
    )
