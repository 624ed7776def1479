# -*- coding: utf-8 -*-
"""
EPI Solver Module

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Generating equation q'' = q / A**2, classification of its solution
families, determination of the amplitude constants from the boundary,
regularity and normalization conditions, and the residuals of the
structural and variational information principles.

This file is part of EprInfo
"""

import collections

import numpy as np
from scipy import interpolate

from modbase import *
from model import Outcome, SpinModel, AmplitudeSet, as_radians, fisher_information_closed
from tools.numerics import TWO_PI, FD_STEP, check_grid, check_step, periodic_grid, closed_romberg, \
    derivative, second_derivative, rk4

MODULE_NAME = "EPI Solver"

# tolerance of the orthogonality condition sin**2(2pi / a) = 0
ORTHOGONALITY_TOLERANCE = 1e-12

# residual accepted by the periodicity test of a solution family
PERIODICITY_TOLERANCE = 1e-9

# coefficients below this are zero in the constant elimination
COEFFICIENT_TOLERANCE = 1e-9


class SolutionFamily:
    """ Solution classes of the generating equation
    @ivar EXPONENTIAL: A**2 > 0
    @ivar TRIGONOMETRIC: A**2 < 0
    """
    (EXPONENTIAL, TRIGONOMETRIC) = range(2)
    Name = ["exponential", "trigonometric"]


class GeneratingEquation:
    """ q'' = q / A**2
    """

    def __init__(self, A_squared):
        if A_squared == 0:
            raise InvalidArgumentError(MODULE_NAME, "A**2 must not be zero")
        self.A_squared = float(A_squared)

    @classmethod
    def for_model(cls, model):
        ''' Trigonometric equation of the model, A**2 = -4 / n**2
        '''
        return cls(-4.0 / model.n ** 2)

    def rhs(self, t, y):
        ''' First order system (q, q')' = (q', q / A**2)
        '''
        return np.array([y[1], y[0] / self.A_squared])

    def closed_form(self, q0, qprime0, theta):
        ''' Solution with q(0) = q0, q'(0) = qprime0
        '''
        theta = as_radians(theta)
        k = 1.0 / np.sqrt(abs(self.A_squared))
        if self.A_squared < 0:
            return q0 * np.cos(k * theta) + (qprime0 / k) * np.sin(k * theta)
        return q0 * np.cosh(k * theta) + (qprime0 / k) * np.sinh(k * theta)

    def closed_form_derivative(self, q0, qprime0, theta):
        theta = as_radians(theta)
        k = 1.0 / np.sqrt(abs(self.A_squared))
        if self.A_squared < 0:
            return -q0 * k * np.sin(k * theta) + qprime0 * np.cos(k * theta)
        return q0 * k * np.sinh(k * theta) + qprime0 * np.cosh(k * theta)

    def __repr__(self):
        return "GeneratingEquation(A_squared=%.17g)" % self.A_squared


class OdeSolution:
    """ Numerical amplitude on a uniform grid over [0, 2pi]
    """

    def __init__(self, grid, values, derivative_values):
        self.grid = np.asarray(grid)  #: uniform grid
        self.values = np.asarray(values)  #: q on the grid
        self.derivative_values = np.asarray(derivative_values)  #: q' on the grid
        self.step = TWO_PI / (len(self.grid) - 1)  #: grid step
        self._spline = None

    def __call__(self, theta):
        ''' Cubic Hermite interpolation between the grid points
        '''
        if self._spline is None:
            self._spline = interpolate.CubicHermiteSpline(self.grid, self.values, self.derivative_values)
        return self._spline(theta)


class ConstantSolveResult:
    """ Amplitude constants determined by the elimination
    """

    def __init__(self, B, C, n, residual, steps=None):
        self.B = np.array(B, dtype=float)  #: sin coefficients by outcome
        self.C = np.array(C, dtype=float)  #: cos coefficients by outcome
        self.n = int(n)  #: quantum number
        self.residual = float(residual)  #: max |sum P - total| and |d2 sum P| on the check grid
        self.steps = steps or []  #: description of the elimination steps

    def amplitudes(self):
        return AmplitudeSet(self.B, self.C, self.n)

    def as_dict(self):
        return {
            "n": self.n,
            "B": {Outcome.Label[o]: float(self.B[o]) for o in Outcome.All},
            "C": {Outcome.Label[o]: float(self.C[o]) for o in Outcome.All},
            "residual": self.residual,
        }


PeriodicityResult = collections.namedtuple("PeriodicityResult", ["residual", "admissible"])


def classify_family(eq):
    ''' Exponential for A**2 > 0, trigonometric for A**2 < 0
    '''
    if eq.A_squared == 0:
        raise InvalidArgumentError(MODULE_NAME, "A**2 must not be zero")
    return SolutionFamily.EXPONENTIAL if eq.A_squared > 0 else SolutionFamily.TRIGONOMETRIC


def _check_n(n):
    if int(n) != n or abs(int(n)) not in (1, 2):
        raise UnsupportedModelError(MODULE_NAME, "only n = +-1 or +-2 keep the outcome space, got %s" % n)
    return int(n)


def admissible_a(n):
    ''' a = 2 / n, the constants for which the base functions are orthogonal over [0, 2pi]
    '''
    n = _check_n(n)
    a = 2.0 / n
    # sin**2(2pi / a) = sin**2(n pi); sin(n pi) is not an exact zero in floating point
    if np.sin(TWO_PI / a) ** 2 > ORTHOGONALITY_TOLERANCE:
        raise ModuleError(MODULE_NAME, "orthogonality condition violated for a = %g" % a)
    return a


def orthogonality_integral(a, grid_points=512):
    ''' integral over [0, 2pi] of sin(theta / a) cos(theta / a) = (a / 2) sin**2(2pi / a)
    @param a: frequency constant, nonzero
    @param grid_points: Romberg resolution, at least 64; the grid is rounded up
        to 2**k + 1 points and never has fewer than 1025
    '''
    if a == 0:
        raise InvalidArgumentError(MODULE_NAME, "a must not be zero")
    grid_points = check_grid(grid_points, 64, MODULE_NAME, even=False)
    return float(closed_romberg(lambda t: np.sin(t / a) * np.cos(t / a), 0.0, TWO_PI, grid_points))


def solve_generating_ode(eq, q0, qprime0, grid_points=4097):
    ''' Integrate q'' = q / A**2 over [0, 2pi] with classic RK4
    @param eq: GeneratingEquation
    @param q0: q(0)
    @param qprime0: q'(0)
    @param grid_points: number of grid points, at least 257
    @return: OdeSolution
    '''
    if not isinstance(eq, GeneratingEquation):
        raise InvalidArgumentError(MODULE_NAME, "a GeneratingEquation is required")
    grid_points = check_grid(grid_points, 257, MODULE_NAME, even=False)
    grid, states = rk4(eq.rhs, [q0, qprime0], 0.0, TWO_PI, grid_points)
    if not np.all(np.isfinite(states)):
        raise ModuleError(MODULE_NAME, "integration diverged")
    return OdeSolution(grid, states[:, 0], states[:, 1])


def periodicity_check(eq, q0, qprime0):
    ''' Rotation invariance of the measuring system: q(theta + 2pi) = +-q(theta)
    @return: PeriodicityResult(residual, admissible)
    '''
    q = lambda t: eq.closed_form(q0, qprime0, t)
    dq = lambda t: eq.closed_form_derivative(q0, qprime0, t)
    plus = abs(q(TWO_PI) - q(0.0)) + abs(dq(TWO_PI) - dq(0.0))
    minus = abs(q(TWO_PI) + q(0.0)) + abs(dq(TWO_PI) + dq(0.0))
    residual = float(min(plus, minus))
    admissible = classify_family(eq) == SolutionFamily.TRIGONOMETRIC and residual < PERIODICITY_TOLERANCE
    return PeriodicityResult(residual, bool(admissible))


def _amplitude_function(model, amplitude):
    ''' Amplitude callable (outcome, theta) -> q, defaults to the EPI solution
    '''
    if amplitude is None:
        amplitudes = AmplitudeSet.epr(model)
        return amplitudes.value
    return amplitude


def structural_principle_residual(theta, model, amplitude=None, h=FD_STEP):
    ''' -2 q q'' + q**2 qF with qF = 2 / A**2 per cell
    @param amplitude: optional callable (outcome, theta) -> q, default the EPI solution
    @return: four residuals ordered by outcome
    '''
    h = check_step(h, MODULE_NAME)
    x = as_radians(theta)
    q_fn = _amplitude_function(model, amplitude)
    q_f = 2.0 / GeneratingEquation.for_model(model).A_squared
    res = []
    for cell in Outcome.All:
        q = lambda t, c=cell: q_fn(c, t)
        res.append(-2.0 * q(x) * second_derivative(q, x, h) + q(x) ** 2 * q_f)
    return np.array(res)


def euler_lagrange_residual(theta, model, amplitude=None, h=FD_STEP):
    ''' q'' - q / A**2 per cell (constant qF = 2 / A**2)
    @param amplitude: optional callable (outcome, theta) -> q, default the EPI solution
    @return: four residuals ordered by outcome
    '''
    h = check_step(h, MODULE_NAME)
    x = as_radians(theta)
    q_fn = _amplitude_function(model, amplitude)
    A_squared = GeneratingEquation.for_model(model).A_squared
    res = []
    for cell in Outcome.All:
        q = lambda t, c=cell: q_fn(c, t)
        res.append(second_derivative(q, x, h) - q(x) / A_squared)
    return np.array(res)


def boundary_constant(outcome, model, amplitude=None, theta_lo=0.0, theta_hi=TWO_PI, h=FD_STEP):
    ''' Integration by parts term [q q'] between the limits, a diagnostic only
    '''
    h = check_step(h, MODULE_NAME)
    q_fn = _amplitude_function(model, amplitude)
    q = lambda t: q_fn(outcome, t)
    hi = q(theta_hi) * derivative(q, theta_hi, h)
    lo = q(theta_lo) * derivative(q, theta_lo, h)
    return float(hi - lo)


def regularity_scan(B_PP, B_PM, C_PM, n, grid_points=256):
    ''' max over the grid of |d2 sum P / d theta2|
    = 1/4 n**2 |-2 B_+- C_+- sin(n theta) + (B_++**2 + B_+-**2 - C_+-**2) cos(n theta)|
    '''
    grid_points = check_grid(grid_points, 64, MODULE_NAME, even=False)
    theta = periodic_grid(grid_points)
    d2 = 0.25 * n ** 2 * (-2.0 * B_PM * C_PM * np.sin(n * theta)
                          + (B_PP ** 2 + B_PM ** 2 - C_PM ** 2) * np.cos(n * theta))
    return float(np.max(np.abs(d2)))


def metric_from_coefficients(B_PP, B_PM, C_PM, n, theta):
    ''' Rao-Fisher metric once the boundary conditions are applied
    (C_++ = C_-- = 0, B_++ = B_--, B_+- = B_-+, C_+- = C_-+)
    '''
    x = as_radians(theta)
    return n ** 2 * (0.5 * (B_PP ** 2 + B_PM ** 2)
                     - 0.5 * B_PM * C_PM * np.sin(n * x)
                     + 0.5 * (C_PM ** 2 - B_PP ** 2 - B_PM ** 2) * np.sin(0.5 * n * x) ** 2)


def generic_ratio(t, n, theta):
    ''' g / sum P for amplitudes normalized to B**2 = C**2 = 2 t instead of 2
    '''
    if t <= 0:
        raise InvalidArgumentError(MODULE_NAME, "scaling must be positive, got %s" % t)
    b = np.sqrt(2.0 * t)
    amplitudes = AmplitudeSet([b, b, 0.0, 0.0], [0.0, 0.0, b, b], n)
    total = float(np.sum(amplitudes.probabilities(theta)))
    return float(metric_from_coefficients(b, 0.0, b, n, theta)) / total


class _ConstantElimination:
    """ Elimination of the amplitude constants. Every step derives its condition
    from the amplitudes q = B sin(n theta / 2) + C cos(n theta / 2) of the
    still unknown coefficients.
    """

    def __init__(self, n, grid_points=256, total=1.0):
        self.n = n
        self.theta = periodic_grid(grid_points)
        self.total = total  #: required value of sum P
        # coefficient slot -> unknown name, or its value once eliminated
        self.B = ["B_" + Outcome.Name[o] for o in Outcome.All]
        self.C = ["C_" + Outcome.Name[o] for o in Outcome.All]
        self.ratio = None  #: (reference, dependent, dependent**2 / reference**2)
        self.values = {}  #: unknown name -> solved value
        self.steps = []

    def unknowns(self):
        names = []
        for slot in self.B + self.C:
            if isinstance(slot, str) and slot not in names:
                names.append(slot)
        return names

    def amplitudes(self, values):
        ''' Amplitudes for a name -> value assignment, unassigned unknowns are zero
        '''
        pick = lambda slot: values.get(slot, 0.0) if isinstance(slot, str) else slot
        return AmplitudeSet([pick(s) for s in self.B], [pick(s) for s in self.C], self.n)

    def second_derivative_total(self, values):
        ''' d2 sum P / d theta2 on the grid, from (q**2 / 4)'' = (q'**2 + q q'') / 2
        '''
        a = self.amplitudes(values)
        return sum(0.5 * (a.first_derivative(o, self.theta) ** 2
                          + a.value(o, self.theta) * a.second_derivative(o, self.theta)) for o in Outcome.All)

    def quadratic_forms(self, fn):
        ''' Coefficients of cos(n theta) and sin(n theta) in a quadratic function of the unknowns
        @param fn: function of a name -> value assignment, returns values on the grid
        @return: tuple(names, K, S), fn = u^T (c0 + K cos(n theta) + S sin(n theta)) u
        '''
        names = self.unknowns()
        basis = np.column_stack([np.ones_like(self.theta), np.cos(self.n * self.theta),
                                 np.sin(self.n * self.theta)])

        def project(values):
            coefficients = np.linalg.lstsq(basis, fn(values), rcond=None)[0]
            return coefficients[1], coefficients[2]

        k = len(names)
        K = np.zeros((k, k))
        S = np.zeros((k, k))
        diagonal = [project({name: 1.0}) for name in names]
        for i in range(k):
            K[i, i], S[i, i] = diagonal[i]
            for j in range(i + 1, k):
                # polarization: f(e_i + e_j) - f(e_i) - f(e_j) = 2 M_ij
                c, s = project({names[i]: 1.0, names[j]: 1.0})
                K[i, j] = K[j, i] = 0.5 * (c - diagonal[i][0] - diagonal[j][0])
                S[i, j] = S[j, i] = 0.5 * (s - diagonal[i][1] - diagonal[j][1])
        K[np.abs(K) < COEFFICIENT_TOLERANCE] = 0.0
        S[np.abs(S) < COEFFICIENT_TOLERANCE] = 0.0
        return names, K, S

    def boundary(self, zero_cells=(Outcome.PP, Outcome.MM)):
        ''' q(0) = B sin(0) + C cos(0) = 0 in the cells with P(.|0) = 0
        '''
        for cell in zero_cells:
            sin0 = self.amplitudes({self.B[cell]: 1.0}).value(cell, 0.0)
            cos0 = self.amplitudes({self.C[cell]: 1.0}).value(cell, 0.0)
            if sin0 != 0.0 or cos0 == 0.0:
                raise ModuleError(MODULE_NAME, "boundary condition does not fix %s" % self.C[cell])
            self.steps.append("boundary: P(%s|0) = 0 -> %s = 0" % (Outcome.Name[cell], self.C[cell]))
            self.C[cell] = 0.0

    def symmetry(self):
        # no preference for upward or downward projections
        ties = []
        for cell, partner in ((Outcome.MM, Outcome.PP), (Outcome.MP, Outcome.PM)):
            for slots in (self.B, self.C):
                if isinstance(slots[cell], str) and isinstance(slots[partner], str):
                    ties.append("%s = %s" % (slots[cell], slots[partner]))
                    slots[cell] = slots[partner]
        self.steps.append("symmetry: " + ", ".join(ties))

    def regularity(self):
        ''' d2 sum P / d theta2 = 0: the sin(n theta) and cos(n theta) coefficients vanish
        '''
        names, K, S = self.quadratic_forms(self.second_derivative_total)
        pairs = [(i, j) for i in range(len(names)) for j in range(i, len(names)) if S[i, j] != 0.0]
        if len(pairs) != 1 or pairs[0][0] == pairs[0][1]:
            raise ModuleError(MODULE_NAME, "regularity: sin(n theta) condition is not a single product")
        i, j = pairs[0]

        # one factor of the product vanishes, the cos(n theta) condition must leave a nonzero solution
        solutions = []
        for zero in (i, j):
            keep = [m for m in range(len(names)) if m != zero]
            sub = K[np.ix_(keep, keep)]
            if len(keep) != 2 or sub[0, 1] != 0.0 or sub[0, 0] * sub[1, 1] >= 0.0:
                continue
            solutions.append((zero, keep, -sub[0, 0] / sub[1, 1]))
        if len(solutions) != 1:
            raise ModuleError(MODULE_NAME, "regularity: %d admissible branches" % len(solutions))

        zero, keep, ratio = solutions[0]
        for slots in (self.B, self.C):
            for k, slot in enumerate(slots):
                if slot == names[zero]:
                    slots[k] = 0.0
        self.ratio = (names[keep[0]], names[keep[1]], ratio)
        self.steps.append("regularity: %.6g %s %s = 0 -> %s = 0; %s**2 = %.6g %s**2"
                          % (2.0 * S[i, j], names[i], names[j], names[zero],
                             names[keep[1]], ratio, names[keep[0]]))

    def normalization(self):
        ''' Scale the regular solution to sum P = total
        '''
        reference, dependent, ratio = self.ratio
        unit = {reference: 1.0, dependent: np.sqrt(ratio)}
        total = np.sum(self.amplitudes(unit).probabilities(self.theta), axis=0)
        if np.ptp(total) > COEFFICIENT_TOLERANCE:
            raise ModuleError(MODULE_NAME, "normalization: sum P depends on theta")
        scale = np.sqrt(self.total / np.mean(total))
        self.values = {reference: scale, dependent: scale * np.sqrt(ratio)}
        self.steps.append("normalization: sum P = %.6g %s**2 = %g -> %s = %.17g, %s = %.17g"
                          % (np.mean(total), reference, self.total,
                             reference, self.values[reference], dependent, self.values[dependent]))

    def coefficients(self):
        amplitudes = self.amplitudes(self.values)
        return amplitudes.B, amplitudes.C


def solve_amplitude_constants(n, grid_points=256, total=1.0, zero_cells=(Outcome.PP, Outcome.MM)):
    ''' Constants of the amplitudes from boundary, symmetry, regularity and normalization
    @param n: quantum number
    @param grid_points: grid of the regularity projection and the residual check
    @param total: required sum P, 1 for probabilities
    @param zero_cells: outcomes with P(.|0) = 0
    @return: ConstantSolveResult with positive roots
    '''
    n = _check_n(n)
    grid_points = check_grid(grid_points, 64, MODULE_NAME, even=False)
    if not total > 0:
        raise InvalidArgumentError(MODULE_NAME, "sum P must be positive, got %s" % total)
    elimination = _ConstantElimination(n, grid_points, total)
    elimination.boundary(zero_cells)
    elimination.symmetry()
    elimination.regularity()
    elimination.normalization()
    B, C = elimination.coefficients()

    theta = elimination.theta
    amplitudes = AmplitudeSet(B, C, n)
    norm = float(np.max(np.abs(np.sum(amplitudes.probabilities(theta), axis=0) - total)))
    regular = float(np.max(np.abs(elimination.second_derivative_total(elimination.values))))
    return ConstantSolveResult(B, C, n, max(norm, regular), elimination.steps)


def principle_residual_maxima(model, grid_points=256, amplitude=None, h=FD_STEP):
    ''' Largest structural and Euler-Lagrange residuals over a periodic grid
    @return: (structural, euler_lagrange)
    '''
    theta = periodic_grid(check_grid(grid_points, 16, MODULE_NAME))
    structural = max(np.max(np.abs(structural_principle_residual(t, model, amplitude, h))) for t in theta)
    euler = max(np.max(np.abs(euler_lagrange_residual(t, model, amplitude, h))) for t in theta)
    return float(structural), float(euler)


class SLV_Epi(ModuleBase):
    """
    Numerical reproduction of the EPI derivation
    """

    def __init__(self, *args, **kwargs):
        super().__init__(name=MODULE_NAME, **kwargs)

        # XML parameter version
        # 1: initial version
        self.xmlVersion = 1

        # set default properties
        self.setDefault()

    def setDefault(self):
        """ Set all module parameters to default values
        """
        self.ode_points = 4097  #: RK4 grid size
        self.residual_points = 256  #: grid for residual and regularity checks
        self.fd_step = FD_STEP  #: finite difference step for q''

    def get_module_info(self):
        return "RK4 grid %d, residual grid %d\n" % (self.ode_points, self.residual_points)

    def solve(self, n):
        ''' Full pipeline: constants, ODE check and principle residuals
        @return: report dictionary
        '''
        result = solve_amplitude_constants(n, self.residual_points)
        for step in result.steps:
            self.send_log(step)
        model = SpinModel(n)
        eq = GeneratingEquation.for_model(model)

        # RK4 against the closed form amplitudes ++ and +-
        ode_error = 0.0
        amplitudes = result.amplitudes()
        for cell in (Outcome.PP, Outcome.PM):
            sol = solve_generating_ode(eq, amplitudes.value(cell, 0.0), amplitudes.first_derivative(cell, 0.0),
                                       self.ode_points)
            ode_error = max(ode_error, float(np.max(np.abs(sol.values - amplitudes.value(cell, sol.grid)))))

        structural, euler = principle_residual_maxima(model, self.residual_points, amplitudes.value, self.fd_step)
        report = result.as_dict()
        report.update({
            "A_squared": eq.A_squared,
            "family": SolutionFamily.Name[classify_family(eq)],
            "a": admissible_a(n),
            "ode_max_error": ode_error,
            "structural_residual_max": structural,
            "euler_lagrange_residual_max": euler,
            "fisher_information": fisher_information_closed(model),
            "boundary_constants": {Outcome.Label[o]: boundary_constant(o, model, amplitudes.value, h=self.fd_step)
                                   for o in Outcome.All},
        })
        self.send_event(ModuleEvent(self._object_name, EventType.STATUS,
                                    "n=%+d residual %.3g" % (n, result.residual), status_field="Solve"))
        return report

    def getXML(self):
        """ Get module properties for XML configuration file
        @return: objectify XML element::
            <EpiSolver instance="0" version="1" module="solver">
                <ode_points>4097</ode_points>
                ...
            </EpiSolver>
        """
        E = objectify.E
        return self._element("EpiSolver",
                             E.ode_points(self.ode_points),
                             E.residual_points(self.residual_points),
                             E.fd_step(self.fd_step),
                             version=self.xmlVersion,
                             instance=self._instance,
                             module="solver")

    def setXML(self, xml):
        """ Set module properties from XML configuration file
        @param xml: complete objectify XML configuration tree
        """
        cfg = self._find_configuration(xml, "EpiSolver", "solver")
        if cfg is None:
            return
        try:
            self.ode_points = int(cfg.ode_points.pyval)
            self.residual_points = int(cfg.residual_points.pyval)
            self.fd_step = float(cfg.fd_step.pyval)
        except Exception as e:
            self.send_exception(e, severity=ErrorSeverity.NOTIFY)
