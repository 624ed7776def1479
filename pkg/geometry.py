# -*- coding: utf-8 -*-
"""
Simplex Geometry Module

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Probability simplex with the diagonal Rao-Fisher metric, amplitude
coordinates on the sphere of radius 2 and the metric induced on curves
theta -> P(theta) in its log, ratio and amplitude forms.

This file is part of EprInfo
"""

import numpy as np

from modbase import *
from model import Outcome, AmplitudeSet, as_radians, joint_distribution
from tools.numerics import FD_STEP, check_grid, check_step, periodic_grid, derivative

MODULE_NAME = "Simplex Geometry"

# normalization tolerance of simplex and sphere points
POINT_TOLERANCE = 1e-12

# squared radius of the amplitude sphere
SPHERE_RADIUS_SQUARED = 4.0


class SimplexPoint:
    """ Point of the probability simplex with aleph >= 2 cells
    """

    def __init__(self, p):
        p = np.array(p, dtype=float)
        if p.ndim != 1 or len(p) < 2:
            raise InvalidArgumentError(MODULE_NAME, "a simplex point needs at least two cells")
        if np.any(p < 0.0) or abs(p.sum() - 1.0) > POINT_TOLERANCE:
            raise InvalidArgumentError(MODULE_NAME, "not a point of the simplex: %s" % p)
        self.p = p

    @property
    def aleph(self):
        return len(self.p)

    def is_interior(self):
        return bool(np.all(self.p > 0.0))

    def __repr__(self):
        return "SimplexPoint(%s)" % self.p


class AmplitudePoint:
    """ Point of the amplitude sphere, sum q**2 = 4
    """

    def __init__(self, q):
        q = np.array(q, dtype=float)
        if abs(np.sum(q * q) - SPHERE_RADIUS_SQUARED) > POINT_TOLERANCE:
            raise InvalidArgumentError(MODULE_NAME, "not on the amplitude sphere: %s" % q)
        self.q = q

    def to_probabilities(self):
        return self.q * self.q / 4.0


class DerivativeMode:
    """ How a curve provides its derivatives
    @ivar CLOSED_FORM: derivative callables supplied with the curve
    @ivar FINITE_DIFFERENCE: central differences with step h
    """
    (CLOSED_FORM, FINITE_DIFFERENCE) = range(2)
    Name = ["closed", "fd"]


class InducedForm:
    """ Equivalent forms of the induced metric
    @ivar LOG: sum P (d ln P)**2
    @ivar RATIO: sum (dP)**2 / P
    @ivar AMPLITUDE: sum (dq)**2
    """
    (LOG, RATIO, AMPLITUDE) = range(3)
    Name = ["log", "ratio", "amplitude"]


class CurveOnSimplex:
    """ Curve theta -> SimplexPoint, evaluators must be free of side effects
    """

    def __init__(self, evaluator, derivative_mode=DerivativeMode.FINITE_DIFFERENCE, h=FD_STEP,
                 amplitude_evaluator=None, probability_derivative=None, amplitude_derivative=None,
                 richardson=False):
        ''' Create the curve
        @param evaluator: callable theta -> probabilities (array of aleph cells)
        @param derivative_mode: DerivativeMode
        @param h: finite difference step
        @param amplitude_evaluator: signed amplitudes theta -> q, default 2 sqrt(P)
        @param probability_derivative: closed form dP/dtheta
        @param amplitude_derivative: closed form dq/dtheta
        @param richardson: Richardson extrapolation of the differences
        '''
        self.evaluator = evaluator
        self.derivative_mode = derivative_mode
        self.h = check_step(h, MODULE_NAME)
        self.amplitude_evaluator = amplitude_evaluator
        self.probability_derivative = probability_derivative
        self.amplitude_derivative = amplitude_derivative
        self.richardson = richardson
        if derivative_mode == DerivativeMode.CLOSED_FORM and \
                (probability_derivative is None or amplitude_derivative is None):
            raise InvalidArgumentError(MODULE_NAME, "closed form curves need both derivative callables")

    def point(self, theta):
        return SimplexPoint(self.evaluator(theta))

    def probabilities(self, theta):
        return np.asarray(self.evaluator(theta), dtype=float)

    def amplitudes(self, theta):
        if self.amplitude_evaluator is not None:
            return np.asarray(self.amplitude_evaluator(theta), dtype=float)
        return 2.0 * np.sqrt(self.probabilities(theta))

    def d_probabilities(self, theta):
        if self.derivative_mode == DerivativeMode.CLOSED_FORM:
            return np.asarray(self.probability_derivative(theta), dtype=float)
        return derivative(self.probabilities, theta, self.h, self.richardson)

    def d_log_probabilities(self, theta):
        if self.derivative_mode == DerivativeMode.CLOSED_FORM:
            return self.d_probabilities(theta) / self.probabilities(theta)
        return derivative(lambda t: np.log(self.probabilities(t)), theta, self.h, self.richardson)

    def d_amplitudes(self, theta):
        if self.derivative_mode == DerivativeMode.CLOSED_FORM:
            return np.asarray(self.amplitude_derivative(theta), dtype=float)
        return derivative(self.amplitudes, theta, self.h, self.richardson)


def epr_curve(model, derivative_mode=DerivativeMode.CLOSED_FORM, h=FD_STEP):
    ''' Statistical space of the EPR-Bohm model as a curve on the 3-simplex
    '''
    amplitudes = AmplitudeSet.epr(model)
    return CurveOnSimplex(
        lambda t: joint_distribution(t, model).p,
        derivative_mode=derivative_mode,
        h=h,
        amplitude_evaluator=amplitudes.values,
        probability_derivative=lambda t: np.array(
            [0.5 * amplitudes.value(o, t) * amplitudes.first_derivative(o, t) for o in Outcome.All]),
        amplitude_derivative=lambda t: np.array([amplitudes.first_derivative(o, t) for o in Outcome.All]),
    )


def binomial_curve(derivative_mode=DerivativeMode.CLOSED_FORM, h=FD_STEP):
    ''' P = (sin**2 theta, cos**2 theta) on the 1-simplex, metric 4 everywhere
    '''
    return CurveOnSimplex(
        lambda t: np.array([np.sin(t) ** 2, np.cos(t) ** 2]),
        derivative_mode=derivative_mode,
        h=h,
        amplitude_evaluator=lambda t: np.array([2.0 * np.sin(t), 2.0 * np.cos(t)]),
        probability_derivative=lambda t: np.array([np.sin(2.0 * t), -np.sin(2.0 * t)]),
        amplitude_derivative=lambda t: np.array([2.0 * np.cos(t), -2.0 * np.sin(t)]),
    )


def _check_interior(p, what):
    for cell, value in enumerate(p):
        if value <= 0.0:
            raise BoundaryError(MODULE_NAME, "%s undefined on the boundary, cell %d has P = 0"
                                % (what, cell), cell=cell)


def simplex_metric(point):
    ''' Rao-Fisher metric diag(1 / p_j)
    '''
    _check_interior(point.p, "metric")
    return np.diag(1.0 / point.p)


def metric_on_lambda_space(point):
    ''' Metric in the coordinates lambda_j = p_j, pulled back from the amplitude sphere.
    With q_j = 2 sqrt(lambda_j) the Jacobian is diag(1 / sqrt(lambda_j)), so
    g^kl = sum_j dq_j/dlambda_k dq_j/dlambda_l = delta^kl / lambda_k,
    which is the simplex metric component by component.
    '''
    return simplex_metric(point)


def to_amplitudes(point, signs=None):
    ''' q_j = sign_j 2 sqrt(p_j)
    @param signs: list of +-1, default all positive
    '''
    if signs is None:
        signs = np.ones(point.aleph)
    signs = np.asarray(signs, dtype=float)
    if signs.shape != point.p.shape or not np.all(np.abs(signs) == 1.0):
        raise InvalidArgumentError(MODULE_NAME, "one sign +1 or -1 per cell required")
    return AmplitudePoint(signs * 2.0 * np.sqrt(point.p))


def induced_metric(curve, theta, form=InducedForm.AMPLITUDE):
    ''' g^theta,theta of the curve at theta
    @param curve: CurveOnSimplex
    @param form: InducedForm
    '''
    x = as_radians(theta)
    if form == InducedForm.AMPLITUDE:
        dq = curve.d_amplitudes(x)
        return float(np.sum(dq * dq))

    p = curve.probabilities(x)
    for cell, value in enumerate(p):
        if value <= 0.0:
            raise BoundaryError(MODULE_NAME, "%s form singular at theta=%.17g, cell %s has P = 0"
                                % (InducedForm.Name[form], x, _cell_name(cell, len(p))), cell=cell)
    if form == InducedForm.LOG:
        dl = curve.d_log_probabilities(x)
        return float(np.sum(p * dl * dl))
    if form == InducedForm.RATIO:
        dp = curve.d_probabilities(x)
        return float(np.sum(dp * dp / p))
    raise InvalidArgumentError(MODULE_NAME, "unknown induced metric form %s" % form)


def _cell_name(cell, aleph):
    if aleph == 4:
        return Outcome.Name[cell]
    return str(cell)


def metric_constancy_scan(curve, grid_points=512, form=InducedForm.AMPLITUDE):
    ''' Smallest and largest induced metric over a periodic grid
    @return: (min, max)
    '''
    grid_points = check_grid(grid_points, 16, MODULE_NAME)
    values = [induced_metric(curve, t, form) for t in periodic_grid(grid_points)]
    return float(np.min(values)), float(np.max(values))


class GEO_Simplex(ModuleBase):
    """
    Rao-Fisher geometry of the statistical space
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
        self.scan_points = 512  #: grid size of the constancy scan
        self.fd_step = FD_STEP  #: finite difference step
        self.derivative_mode = DerivativeMode.CLOSED_FORM  #: derivatives of the EPR curve

    def get_module_info(self):
        return "scan grid %d, %s derivatives\n" % (self.scan_points, DerivativeMode.Name[self.derivative_mode])

    def scan(self, model, form=InducedForm.AMPLITUDE):
        ''' Constancy scan of the induced metric of the EPR curve
        @return: report dictionary with the grid rows
        '''
        curve = epr_curve(model, self.derivative_mode, self.fd_step)
        theta = periodic_grid(check_grid(self.scan_points, 16, MODULE_NAME))
        rows = [{"theta": float(t), "g": induced_metric(curve, t, form)} for t in theta]
        values = [r["g"] for r in rows]
        lo, hi = float(np.min(values)), float(np.max(values))
        self.send_event(ModuleEvent(self._object_name, EventType.STATUS,
                                    "n=%+d metric in [%.17g, %.17g]" % (model.n, lo, hi), status_field="Metric"))
        return {
            "form": InducedForm.Name[form],
            "min": lo,
            "max": hi,
            "spread": hi - lo,
            "expected": float(model.n ** 2),
            "rows": rows,
        }

    def getXML(self):
        """ Get module properties for XML configuration file
        @return: objectify XML element::
            <SimplexGeometry instance="0" version="1" module="geometry">
                <scan_points>512</scan_points>
                ...
            </SimplexGeometry>
        """
        E = objectify.E
        return self._element("SimplexGeometry",
                             E.scan_points(self.scan_points),
                             E.fd_step(self.fd_step),
                             E.derivative_mode(self.derivative_mode),
                             version=self.xmlVersion,
                             instance=self._instance,
                             module="geometry")

    def setXML(self, xml):
        """ Set module properties from XML configuration file
        @param xml: complete objectify XML configuration tree
        """
        cfg = self._find_configuration(xml, "SimplexGeometry", "geometry")
        if cfg is None:
            return
        try:
            self.scan_points = int(cfg.scan_points.pyval)
            self.fd_step = float(cfg.fd_step.pyval)
            self.derivative_mode = int(cfg.derivative_mode.pyval)
        except Exception as e:
            self.send_exception(e, severity=ErrorSeverity.NOTIFY)
