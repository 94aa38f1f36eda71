"""Scikit-learn style front door: fit a channel realization, predict symbols."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .channel import ChannelSet, equivalent_channel
from .detection import DetectorInput, detect_scalar_ls, detect_wl_ls
from .measurement import alignment_phasors
from .modulation import make_constellation
from .objective import aligned_gain, leakage_of_gain
from .optimizer import AOConfig, ao_solve


class LeakageMinimizer(BaseEstimator):
    """Joint port/phase/beamformer optimizer wrapped as an estimator.

    ``fit`` takes one :class:`~frislab.channel.ChannelSet` and runs the
    alternating optimizer; the selected ports, discrete phases, beamformer,
    and leakage trace become fitted attributes.  ``predict`` maps a batch of
    strong-reference residual readouts (``y - |r|``, shape
    ``(n_symbols, n_r)``) to constellation indices with the configured
    detector.

    Parameters mirror the solver configuration so the estimator composes
    with ``get_params`` / ``set_params`` tooling.
    """

    def __init__(
        self,
        power=1.0,
        m_o=9,
        m_p=8,
        cem_k=200,
        cem_iters=20,
        cem_rho=0.1,
        cem_alpha=0.7,
        t_theta=3,
        ao_eps=1e-8,
        ao_max_iters=50,
        stop_rule="abs",
        mode="fris",
        modulation="qam4",
        kappa_override=None,
        detector="scalar_ls",
        random_state=None,
    ):
        self.power = power
        self.m_o = m_o
        self.m_p = m_p
        self.cem_k = cem_k
        self.cem_iters = cem_iters
        self.cem_rho = cem_rho
        self.cem_alpha = cem_alpha
        self.t_theta = t_theta
        self.ao_eps = ao_eps
        self.ao_max_iters = ao_max_iters
        self.stop_rule = stop_rule
        self.mode = mode
        self.modulation = modulation
        self.kappa_override = kappa_override
        self.detector = detector
        self.random_state = random_state

    def _ao_config(self, kappa: complex) -> AOConfig:
        return AOConfig(
            power=self.power,
            m_o=self.m_o,
            m_p=self.m_p,
            kappa=kappa,
            cem_k=self.cem_k,
            cem_iters=self.cem_iters,
            cem_rho=self.cem_rho,
            cem_alpha=self.cem_alpha,
            t_theta=self.t_theta,
            ao_eps=self.ao_eps,
            ao_max_iters=self.ao_max_iters,
            stop_rule=self.stop_rule,
        )

    def fit(self, X: ChannelSet, y=None):
        """Optimize the surface configuration for one channel realization."""
        if not isinstance(X, ChannelSet):
            raise TypeError("fit expects a ChannelSet")
        constellation = make_constellation(self.modulation)
        kappa = (
            constellation.kappa
            if self.kappa_override is None
            else complex(self.kappa_override)
        )
        rng = np.random.default_rng(self.random_state)
        report = ao_solve(X, self._ao_config(kappa), mode=self.mode, rng=rng)
        self.constellation_ = constellation
        self.kappa_ = kappa
        self.report_ = report
        self.ports_ = report.ports
        self.phases_ = report.phases
        self.beamformer_ = report.beamformer
        self.alignment_ = alignment_phasors(X.reference)
        self.h_eq_ = equivalent_channel(X, report.state(self.m_p))
        self.gain_ = aligned_gain(self.alignment_, self.h_eq_, self.beamformer_)
        self.leakage_ = leakage_of_gain(self.gain_, kappa)
        return self

    def _check_fitted(self):
        if not hasattr(self, "gain_"):
            raise NotFittedError("this LeakageMinimizer is not fitted yet")

    def predict(self, X) -> np.ndarray:
        """Detect constellation indices from residual readouts ``y - |r|``."""
        self._check_fitted()
        residual = np.asarray(X, dtype=float)
        inp = DetectorInput(
            y=residual,
            reference=np.zeros(residual.shape[-1]),
            gain=self.gain_,
            constellation=self.constellation_,
        )
        if self.detector == "scalar_ls":
            return detect_scalar_ls(inp)
        if self.detector == "wl_ls":
            return detect_wl_ls(inp)
        raise ValueError(f"estimator detector must be scalar_ls or wl_ls, got {self.detector!r}")

    def predict_symbols(self, X) -> np.ndarray:
        """Like :meth:`predict` but returns complex constellation points."""
        return self.constellation_.points[self.predict(X)]
