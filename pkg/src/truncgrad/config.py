"""Settings shared by the SVD and EVD tangent kernels."""

from __future__ import annotations

from dataclasses import dataclass

DEGENERACY_POLICIES = ("error", "lorentzian")


@dataclass(frozen=True)
class GradConfig:
    """Knobs for the tangent kernels and the verification harness.

    alpha            split of the unitary-gauge diagonal between dU and dV
    eps_deg          relative spectral-gap threshold (vs. the largest
                     singular value squared, resp. the largest |eigenvalue|)
    degeneracy_policy  "error" raises on gap violations; "lorentzian"
                     replaces 1/x by x/(x^2 + eps_b^2) and never raises
    eps_b            Lorentzian broadening width
    fd_step          finite-difference step; None selects
                     eps^(1/3) * (1 + ||A||_F)
    solver_tol       relative residual target for the shifted solves
    solver_max_iter  Krylov iteration cap per shifted system
    """

    alpha: float = 0.5
    eps_deg: float = 1e-12
    degeneracy_policy: str = "error"
    eps_b: float = 1e-6
    fd_step: float | None = None
    solver_tol: float = 1e-10
    solver_max_iter: int = 400

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.eps_deg <= 0.0:
            raise ValueError("eps_deg must be positive")
        if self.degeneracy_policy not in DEGENERACY_POLICIES:
            raise ValueError(f"unknown degeneracy policy {self.degeneracy_policy!r}")
        if self.eps_b <= 0.0:
            raise ValueError("eps_b must be positive")
        if self.fd_step is not None and self.fd_step <= 0.0:
            raise ValueError("fd_step must be positive when given")
        if self.solver_tol <= 0.0:
            raise ValueError("solver_tol must be positive")
        if self.solver_max_iter < 1:
            raise ValueError("solver_max_iter must be at least 1")
