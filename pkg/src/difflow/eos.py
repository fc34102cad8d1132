"""Peng-Robinson thermodynamics for a pure substance.

Closed-form Helmholtz free energy density and everything derived from it:
chemical potential with its convex/concave split, entropy, internal energy,
bulk pressure, the temperature-dependent influence parameter of the density
gradient energy, and the volumetric heat capacity used by the implicit
energy solve.  All quantities are SI and per unit volume unless noted;
every function accepts scalars or numpy arrays for (n, T).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Ideal gas constant [J/mol/K].  Value pinned here; all formulas assume SI.
GAS_CONSTANT = 8.314462618

# Relative margin keeping the repulsion/attraction logarithms finite:
# valid molar densities are n/(1/b) in (DENSITY_MARGIN, 1 - DENSITY_MARGIN).
DENSITY_MARGIN = 1e-12

_SQRT2 = np.sqrt(2.0)


class ThermoDomainError(ValueError):
    """Raised for (n, T) outside the covolume-bounded density/temperature domain."""


@dataclass(frozen=True)
class Substance:
    """Physical constants of the simulated fluid.

    cp_coeffs are the four polynomial coefficients of the ideal-gas molar
    heat capacity at constant pressure, J/mol/K with T in K.
    """

    molar_weight: float        # kg/mol
    T_crit: float              # K
    P_crit: float              # Pa
    acentric: float            # dimensionless
    cp_coeffs: tuple[float, float, float, float]
    theta0: float              # J/mol, reference molar internal energy
    T0: float = 298.15         # K, reference temperature
    P0: float = 1.0e5          # Pa, reference pressure

    def __post_init__(self):
        if self.T_crit <= 0.0 or self.P_crit <= 0.0:
            raise ValueError("T_crit and P_crit must be positive")
        if self.molar_weight <= 0.0:
            raise ValueError("molar_weight must be positive")
        if len(self.cp_coeffs) != 4:
            raise ValueError("cp_coeffs must have exactly 4 entries")
        # psi_v = psi_p - R must stay positive over the operating range.
        T = np.linspace(200.0, 600.0, 81)
        psi_v = _poly3(self.cp_coeffs, T) - GAS_CONSTANT
        if np.any(psi_v <= 0.0):
            bad = T[np.argmin(psi_v)]
            raise ValueError(
                f"substance data error: psi_v(T) <= 0 near T = {bad:.1f} K"
            )


@dataclass(frozen=True)
class EosCoeffs:
    """Derived EOS constants cached from a Substance."""

    m: float            # dimensionless slope of the attraction correction
    b: float            # m^3/mol covolume
    beta1: float        # dimensionless (carries the 1e-16 scale), < 0
    beta2: float        # dimensionless (carries the 1e-16 scale), > 0
    gas_constant: float = GAS_CONSTANT

    def __post_init__(self):
        if self.b <= 0.0:
            raise ValueError("covolume b must be positive")
        if not (self.beta1 < 0.0 < self.beta2):
            raise ValueError("expected beta1 < 0 < beta2")


def derive_coefficients(substance: Substance) -> EosCoeffs:
    """Compute m, b, beta1, beta2 from the critical constants and acentric factor."""
    w = substance.acentric
    if w <= 0.49:
        m = 0.37464 + 1.54226 * w - 0.26992 * w * w
    else:
        m = 0.379642 + 1.485030 * w - 0.164423 * w * w + 0.016666 * w ** 3
    b = 0.07780 * GAS_CONSTANT * substance.T_crit / substance.P_crit
    beta1 = -1.0e-16 / (1.2326 + 1.3757 * w)
    beta2 = 1.0e-16 / (0.9051 + 1.5410 * w)
    return EosCoeffs(m=m, b=b, beta1=beta1, beta2=beta2)


def _poly3(coeffs, T):
    a0, a1, a2, a3 = coeffs
    return a0 + T * (a1 + T * (a2 + T * a3))


def n_butane() -> Substance:
    """n-butane (nC4), the reference hydrocarbon used by the bundled scenarios."""
    return Substance(
        molar_weight=58.12e-3,
        T_crit=425.2,
        P_crit=38.0e5,
        acentric=0.199,
        cp_coeffs=(9.487, 3.313e-1, -1.108e-4, -2.822e-9),
        theta0=-2478.95687512,
        T0=298.15,
        P0=1.0e5,
    )


class PengRobinson:
    """All closed-form thermodynamic evaluations for one substance.

    Stateless apart from the cached constants; every method is a pure
    function of its arguments and safe to call concurrently.
    """

    def __init__(self, substance: Substance, coeffs: EosCoeffs | None = None):
        self.substance = substance
        self.coeffs = coeffs if coeffs is not None else derive_coefficients(substance)
        # a(T) = a_crit * [1 + m(1 - sqrt(T/Tc))]^2
        self.a_crit = (
            0.45724 * GAS_CONSTANT ** 2 * substance.T_crit ** 2 / substance.P_crit
        )
        self.n_max = 1.0 / self.coeffs.b

    # -- domain ------------------------------------------------------------

    def check_temperature(self, T) -> None:
        if np.any(np.asarray(T) <= 0.0):
            raise ThermoDomainError("temperature must be positive")

    def check_point(self, n, T) -> None:
        """Hard domain gate: n/(1/b) in (margin, 1 - margin), T > 0.

        Out-of-domain states are errors, never clamped, so a solver that
        leaves the physical region fails loudly.
        """
        self.check_temperature(T)
        x = np.asarray(n) * self.coeffs.b
        if np.any(x <= DENSITY_MARGIN) or np.any(x >= 1.0 - DENSITY_MARGIN):
            raise ThermoDomainError(
                "molar density outside the covolume-bounded domain (0, 1/b)"
            )

    def in_domain(self, n, T) -> bool:
        x = np.asarray(n) * self.coeffs.b
        return bool(
            np.all(np.asarray(T) > 0.0)
            and np.all(x > DENSITY_MARGIN)
            and np.all(x < 1.0 - DENSITY_MARGIN)
        )

    # -- temperature-only quantities ----------------------------------------

    def energy_param(self, T):
        """Return (a, a', a'') of the attraction parameter at temperature T.

        a'' is evaluated in the factored form that stays finite where the
        correction bracket crosses zero, and is nonnegative for all T > 0.
        """
        self.check_temperature(T)
        T = np.asarray(T, dtype=float)
        m = self.coeffs.m
        Tc = self.substance.T_crit
        sqrtTTc = np.sqrt(T * Tc)
        bracket = 1.0 + m * (1.0 - np.sqrt(T / Tc))
        a = self.a_crit * bracket ** 2
        a1 = -self.a_crit * bracket * m / sqrtTTc
        a2 = self.a_crit * m * (1.0 + m) / (2.0 * T * sqrtTTc)
        return a, a1, a2

    def ideal_heat_capacity(self, T):
        """Return (psi_p, psi_v) of the ideal gas, J/mol/K."""
        self.check_temperature(T)
        psi_p = _poly3(self.substance.cp_coeffs, np.asarray(T, dtype=float))
        psi_v = psi_p - GAS_CONSTANT
        if np.any(psi_v <= 0.0):
            raise ThermoDomainError("substance data error: psi_v <= 0")
        return psi_p, psi_v

    def _cp_integral_over_T(self, T):
        # int_{T0}^{T} psi_p(s)/s ds, in closed form (log + polynomial).
        a0, a1, a2, a3 = self.substance.cp_coeffs
        T0 = self.substance.T0
        return (
            a0 * np.log(T / T0)
            + a1 * (T - T0)
            + a2 * (T * T - T0 * T0) / 2.0
            + a3 * (T ** 3 - T0 ** 3) / 3.0
        )

    def _cp_integral(self, T):
        # int_{T0}^{T} psi_p(s) ds, in closed form.
        a0, a1, a2, a3 = self.substance.cp_coeffs
        T0 = self.substance.T0
        return (
            a0 * (T - T0)
            + a1 * (T * T - T0 * T0) / 2.0
            + a2 * (T ** 3 - T0 ** 3) / 3.0
            + a3 * (T ** 4 - T0 ** 4) / 4.0
        )

    def influence_param(self, T):
        """Return (c, c', c'') of the gradient-energy influence parameter."""
        self.check_temperature(T)
        T = np.asarray(T, dtype=float)
        co = self.coeffs
        Tc = self.substance.T_crit
        a, a1, a2 = self.energy_param(T)
        b23 = co.b ** (2.0 / 3.0)
        shape = co.beta1 * (1.0 - T / Tc) + co.beta2
        c = a * b23 * shape
        c1 = a1 * b23 * shape - a * b23 * co.beta1 / Tc
        c2 = a2 * b23 * shape - 2.0 * a1 * b23 * co.beta1 / Tc
        if np.any(c <= 0.0):
            raise ThermoDomainError("influence parameter c(T) <= 0")
        return c, c1, c2

    def concavity_condition(self, T) -> bool:
        """True iff the gradient energy is concave in T at this temperature."""
        self.check_temperature(T)
        T = np.asarray(T, dtype=float)
        co = self.coeffs
        Tr = T / self.substance.T_crit
        bracket = 1.0 + co.m * (1.0 - np.sqrt(Tr))
        value = (1.0 + co.m) * (co.beta1 * (1.0 - Tr) + co.beta2) \
            + 4.0 * co.beta1 * Tr * bracket
        return bool(np.all(value <= 0.0))

    # -- bulk (n, T) quantities ---------------------------------------------

    def _attr_log(self, n):
        bn = self.coeffs.b * np.asarray(n, dtype=float)
        return np.log((1.0 + (1.0 - _SQRT2) * bn) / (1.0 + (1.0 + _SQRT2) * bn))

    def f_bulk(self, n, T):
        """Return (f_ideal, f_rep, f_attr, f_b), all J/m^3."""
        self.check_point(n, T)
        n = np.asarray(n, dtype=float)
        T = np.asarray(T, dtype=float)
        sub, co, R = self.substance, self.coeffs, GAS_CONSTANT
        a, _, _ = self.energy_param(T)
        f_ideal = (
            n * sub.theta0
            + n * self._cp_integral(T)
            - n * R * (T - sub.T0)
            - n * R * T * np.log(sub.P0 / (n * R * T))
            - n * T * self._cp_integral_over_T(T)
        )
        f_rep = -n * R * T * np.log(1.0 - co.b * n)
        f_attr = a * n / (2.0 * _SQRT2 * co.b) * self._attr_log(n)
        return f_ideal, f_rep, f_attr, f_ideal + f_rep + f_attr

    def mu_bulk(self, n, T):
        """Return (mu_b, mu_convex, mu_concave, dmu_convex_dn).

        mu_convex differentiates the ideal+repulsion contributions, mu_concave
        the attraction; their sum is the exact bulk chemical potential.
        """
        self.check_point(n, T)
        n = np.asarray(n, dtype=float)
        T = np.asarray(T, dtype=float)
        sub, co, R = self.substance, self.coeffs, GAS_CONSTANT
        a, _, _ = self.energy_param(T)
        one_m_bn = 1.0 - co.b * n
        mu_ideal = (
            sub.theta0
            + self._cp_integral(T)
            - R * (T - sub.T0)
            - R * T * np.log(sub.P0 / (n * R * T))
            + R * T
            - T * self._cp_integral_over_T(T)
        )
        mu_rep = -R * T * np.log(one_m_bn) + n * co.b * R * T / one_m_bn
        sigma = 1.0 + 2.0 * co.b * n - (co.b * n) ** 2
        mu_concave = a / (2.0 * _SQRT2 * co.b) * self._attr_log(n) - a * n / sigma
        mu_convex = mu_ideal + mu_rep
        dmu_convex = R * T / n + co.b * R * T * (2.0 - co.b * n) / one_m_bn ** 2
        return mu_convex + mu_concave, mu_convex, mu_concave, dmu_convex

    def gamma_s_bulk(self, n, T):
        """Return (gamma_b, s_b): the T-derivative of f_b and the bulk entropy."""
        self.check_point(n, T)
        n = np.asarray(n, dtype=float)
        T = np.asarray(T, dtype=float)
        sub, co, R = self.substance, self.coeffs, GAS_CONSTANT
        _, a1, _ = self.energy_param(T)
        s_b = (
            n * R * np.log(1.0 - co.b * n)
            + n * R * np.log(sub.P0 / (n * R * T))
            + n * self._cp_integral_over_T(T)
            - n * a1 / (2.0 * _SQRT2 * co.b) * self._attr_log(n)
        )
        return -s_b, s_b

    def internal_energy_bulk(self, n, T):
        """Bulk internal energy density, J/m^3."""
        self.check_point(n, T)
        n = np.asarray(n, dtype=float)
        T = np.asarray(T, dtype=float)
        sub, co, R = self.substance, self.coeffs, GAS_CONSTANT
        a, a1, _ = self.energy_param(T)
        return (
            n * sub.theta0
            + n * self._cp_integral(T)
            - n * R * (T - sub.T0)
            + n * (a - T * a1) / (2.0 * _SQRT2 * co.b) * self._attr_log(n)
        )

    def dtheta_bulk_dT(self, n, T):
        """T-derivative of the bulk internal energy density, J/m^3/K."""
        self.check_point(n, T)
        n = np.asarray(n, dtype=float)
        T = np.asarray(T, dtype=float)
        _, psi_v = self.ideal_heat_capacity(T)
        _, _, a2 = self.energy_param(T)
        return n * psi_v - n * T * a2 / (2.0 * _SQRT2 * self.coeffs.b) * self._attr_log(n)

    def p_bulk(self, n, T):
        """Bulk pressure n*mu_b - f_b, Pa."""
        mu_b, _, _, _ = self.mu_bulk(n, T)
        _, _, _, f_b = self.f_bulk(n, T)
        return np.asarray(n, dtype=float) * mu_b - f_b

    def p_bulk_direct(self, n, T):
        """The cubic-EOS pressure formula; algebraically equals p_bulk."""
        self.check_point(n, T)
        n = np.asarray(n, dtype=float)
        T = np.asarray(T, dtype=float)
        co = self.coeffs
        a, _, _ = self.energy_param(T)
        bn = co.b * n
        return n * GAS_CONSTANT * T / (1.0 - bn) - a * n * n / (1.0 + 2.0 * bn - bn * bn)

    def volumetric_heat_capacity(self, n, T, grad_n_sq=0.0):
        """d(theta_b + theta_grad)/dT at fixed n and |grad n|^2, J/m^3/K.

        Strictly positive whenever the concavity condition holds; a
        non-positive value would make the implicit energy solve singular
        and is reported as an error.
        """
        _, _, c2 = self.influence_param(T)
        out = self.dtheta_bulk_dT(n, T) - 0.5 * np.asarray(T, dtype=float) * c2 * grad_n_sq
        if np.any(out <= 0.0):
            raise ThermoDomainError("non-positive volumetric heat capacity")
        return out


def grad_contributions(c_triple, grad_n_sq, T):
    """Gradient-energy contributions from the influence parameter triple.

    Returns (f_grad, gamma_grad, theta_grad, dtheta_grad_dT) for the given
    squared density gradient; T only enters through c' and c''.
    """
    c, c1, c2 = c_triple
    g2 = np.asarray(grad_n_sq, dtype=float)
    f_grad = 0.5 * c * g2
    gamma_grad = 0.5 * c1 * g2
    theta_grad = 0.5 * (c - T * c1) * g2
    dtheta_grad_dT = -0.5 * T * c2 * g2
    return f_grad, gamma_grad, theta_grad, dtheta_grad_dT
