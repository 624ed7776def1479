# -*- coding: utf-8 -*-
"""
EPR-Bohm Model Module

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Closed form joint spin projection probabilities, amplitudes, the three
forms of the Fisher information, channel capacity, structural information
and the averaged (marginal) quantities of the EPR-Bohm model.

This file is part of EprInfo
"""

import collections

import numpy as np

from modbase import *
from tools.numerics import (TWO_PI, FD_STEP, check_grid, check_step, periodic_grid, periodic_trapezoid,
                            derivative, second_derivative)

# cells below this probability are treated as zero by the log and ratio forms
ZERO_PROBABILITY = 1e-14

# normalization tolerance of a joint distribution
NORM_TOLERANCE = 1e-12

MODULE_NAME = "EPR Model"


class Outcome:
    """ Joint spin projection events, the value is the compact cell index
    """
    (PP, MM, PM, MP) = range(4)
    Name = ["++", "--", "+-", "-+"]
    Label = ["pp", "mm", "pm", "mp"]
    All = (PP, MM, PM, MP)

    @classmethod
    def parse(cls, text):
        ''' Get the outcome for "pp", "++", "PP" ...
        '''
        t = str(text).strip().lower()
        if t in cls.Label:
            return cls.Label.index(t)
        if t in cls.Name:
            return cls.Name.index(t)
        raise InvalidArgumentError(MODULE_NAME, "unknown outcome '%s'" % text)


# cells following sin**2(n theta / 2), the others follow cos**2(n theta / 2)
SIN_CELLS = (Outcome.PP, Outcome.MM)
COS_CELLS = (Outcome.PM, Outcome.MP)


class SpinLabel:
    """ Spin of the particles, |n| = 1 -> 1/2, |n| = 2 -> 1
    """
    (HALF, ONE) = range(2)
    Name = ["1/2", "1"]


class Handedness:
    """ Sign of the quantum number
    """
    (RIGHT, LEFT) = range(2)
    Name = ["right", "left"]


class SpinModel:
    """ Model selector, one quantum number n shared by all four cells
    """

    def __init__(self, n):
        ''' Create the model
        @param n: quantum number, one of -2, -1, +1, +2
        '''
        if int(n) != n or abs(int(n)) not in (1, 2):
            raise UnsupportedModelError(MODULE_NAME, "n must be one of -2, -1, +1, +2, got %s" % n)
        self.n = int(n)

    @property
    def spin_label(self):
        return SpinLabel.HALF if abs(self.n) == 1 else SpinLabel.ONE

    @property
    def handedness(self):
        return Handedness.RIGHT if self.n > 0 else Handedness.LEFT

    def __eq__(self, other):
        return isinstance(other, SpinModel) and other.n == self.n

    def __hash__(self):
        return hash(self.n)

    def __repr__(self):
        return "SpinModel(n=%+d, spin=%s, %s)" % (self.n, SpinLabel.Name[self.spin_label],
                                                  Handedness.Name[self.handedness])


class Angle:
    """ Measurement angle between the analyzers, reduced to [0, 2pi)
    """

    def __init__(self, theta):
        self.theta = float(theta) % TWO_PI
        # 2pi - tiny rounds up to 2pi
        if self.theta >= TWO_PI:
            self.theta = 0.0

    @classmethod
    def from_degrees(cls, degrees):
        return cls(np.deg2rad(float(degrees)))

    def __float__(self):
        return self.theta

    def __repr__(self):
        return "Angle(%.17g)" % self.theta


def as_radians(theta):
    ''' Angle objects give their reduced value, numbers and arrays are used as they are
    '''
    if isinstance(theta, Angle):
        return theta.theta
    if np.ndim(theta) == 0:
        return float(theta)
    return np.asarray(theta, dtype=float)


class JointDistribution:
    """ The four probabilities P(S_ab|theta)
    """

    def __init__(self, p, theta=None, model=None):
        ''' Create a distribution
        @param p: four probabilities ordered ++, --, +-, -+
        '''
        p = np.array(p, dtype=float)
        if p.shape != (4,):
            raise InvalidArgumentError(MODULE_NAME, "a joint distribution has four cells")
        if np.any(p < 0.0) or abs(p.sum() - 1.0) > NORM_TOLERANCE:
            raise InvalidArgumentError(MODULE_NAME, "not a probability distribution: %s" % p)
        self.p = p
        self.theta = theta
        self.model = model

    def __getitem__(self, outcome):
        return self.p[outcome]

    def __iter__(self):
        return iter(self.p)

    def as_dict(self):
        return {"p_" + Outcome.Label[o]: float(self.p[o]) for o in Outcome.All}


class AmplitudeSet:
    """ Amplitudes q_ab(theta) = B_ab sin(n theta / 2) + C_ab cos(n theta / 2)
    """

    def __init__(self, B, C, n):
        ''' Create the amplitude set
        @param B: four sin coefficients
        @param C: four cos coefficients
        @param n: shared quantum number
        '''
        self.B = np.array(B, dtype=float)
        self.C = np.array(C, dtype=float)
        self.n = int(n)
        self.A_squared = -4.0 / self.n ** 2  #: coefficient of the generating equation

    @classmethod
    def epr(cls, model, sign=1):
        ''' The EPI solution, B_++ = B_-- = C_+- = C_-+ = sign * sqrt(2)
        '''
        if sign not in (1, -1):
            raise InvalidArgumentError(MODULE_NAME, "amplitude sign must be +1 or -1, got %s" % sign)
        r = sign * np.sqrt(2.0)
        return cls([r, r, 0.0, 0.0], [0.0, 0.0, r, r], model.n)

    def value(self, outcome, theta):
        x = 0.5 * self.n * as_radians(theta)
        return self.B[outcome] * np.sin(x) + self.C[outcome] * np.cos(x)

    def first_derivative(self, outcome, theta):
        x = 0.5 * self.n * as_radians(theta)
        return 0.5 * self.n * (self.B[outcome] * np.cos(x) - self.C[outcome] * np.sin(x))

    def second_derivative(self, outcome, theta):
        return -0.25 * self.n ** 2 * self.value(outcome, theta)

    def values(self, theta):
        ''' All four amplitudes, shape (4,) + shape(theta)
        '''
        return np.array([self.value(o, theta) for o in Outcome.All])

    def probabilities(self, theta):
        ''' 4 P = q**2
        '''
        return self.values(theta) ** 2 / 4.0


class InformationBudget:
    """ Physical information K = I + kappa * Q
    """

    def __init__(self, I, Q, kappa=1.0):
        self.I = float(I)  #: information channel capacity
        self.Q = float(Q)  #: structural information
        self.kappa = float(kappa)  #: efficiency coefficient
        self.K = self.I + self.kappa * self.Q  #: physical information

    def as_dict(self):
        return {"I": self.I, "Q": self.Q, "K": self.K, "kappa": self.kappa}


class FisherForm:
    """ Forms of the Fisher information
    @ivar ANALYTICAL: sum P * (-d2 ln P)
    @ivar METRIC: sum (dP)**2 / P
    @ivar EPI: -sum q * q''
    """
    (ANALYTICAL, METRIC, EPI) = range(3)
    Name = ["analytical", "metric", "epi"]


Superadditivity = collections.namedtuple("Superadditivity", ["joint", "marginal_sum", "holds"])


def probability(outcome, theta, model):
    ''' P(S_ab|theta), 1/2 sin**2(n theta / 2) for ++ and --, 1/2 cos**2(n theta / 2) for +- and -+
    Written with cos(n theta) so the boundary values are exact zeros.
    '''
    c = np.cos(model.n * as_radians(theta))
    if outcome in SIN_CELLS:
        return 0.25 * (1.0 - c)
    return 0.25 * (1.0 + c)


def joint_distribution(theta, model):
    ''' The four cells at one angle
    '''
    p = [probability(o, theta, model) for o in Outcome.All]
    return JointDistribution(p, theta=as_radians(theta), model=model)


def amplitude(outcome, theta, model, sign=1):
    ''' q_ab(theta) of the EPI solution, 4 P = q**2
    '''
    return AmplitudeSet.epr(model, sign).value(outcome, theta)


def marginal_single(theta=None):
    ''' P(S_b|theta), independent of the angle
    '''
    return 0.5


def averaged_joint(outcome, model, grid_points=512):
    ''' P(S_ab) averaged with the flat angle density 1 / 2pi
    '''
    grid_points = check_grid(grid_points, 16, MODULE_NAME)
    theta = periodic_grid(grid_points)
    return float(periodic_trapezoid(probability(outcome, theta, model)) / TWO_PI)


def conditional_given_other(model, outcome=Outcome.PP, grid_points=512):
    ''' Bayes: P(S_a|S_b) = P(S_ab) / P(S_b)
    '''
    return averaged_joint(outcome, model, grid_points) / marginal_single()


def conditional_on_angle(outcome, theta, model):
    ''' P(S_a|S_b, theta) = P(S_ab|theta) / P(S_b|theta)
    '''
    return probability(outcome, theta, model) / marginal_single(theta)


def dependence_gap(theta, model):
    ''' P(S_ab|theta) - P(S_a|theta) P(S_b|theta) per cell
    '''
    reference = marginal_single(theta) * marginal_single(theta)
    return np.array([probability(o, theta, model) - reference for o in Outcome.All])


def spin_correlation(theta, model):
    ''' Expected product of the spin projections, -cos(n theta)
    '''
    p = [probability(o, theta, model) for o in Outcome.All]
    return p[Outcome.PP] + p[Outcome.MM] - p[Outcome.PM] - p[Outcome.MP]


def period(model):
    ''' Amplitude period, 4pi for spin 1/2 and 2pi for spin 1
    '''
    return 2.0 * TWO_PI / abs(model.n)


def fisher_information_closed(model):
    ''' g^theta,theta = n**2, independent of the angle
    '''
    return float(model.n ** 2)


def _check_cells(p, theta):
    for cell in Outcome.All:
        if p[cell] < ZERO_PROBABILITY:
            raise DomainError(MODULE_NAME, "P(%s|%.17g) = 0, log/ratio form is singular"
                              % (Outcome.Name[cell], theta), cell=cell)


def fisher_information_numeric(theta, model, form=FisherForm.METRIC, h=FD_STEP, richardson=False):
    ''' Fisher information from central differences
    @param theta: angle
    @param model: SpinModel
    @param form: FisherForm
    @param h: finite difference step in (0, 1e-3]
    @param richardson: use Richardson extrapolation
    @return: Fisher information (n**2 up to the difference error)
    '''
    h = check_step(h, MODULE_NAME)
    x = as_radians(theta)

    if form == FisherForm.EPI:
        amplitudes = AmplitudeSet.epr(model)
        total = 0.0
        for cell in Outcome.All:
            q = lambda t, c=cell: amplitudes.value(c, t)
            total -= q(x) * second_derivative(q, x, h, richardson)
        return float(total)

    p = [probability(o, x, model) for o in Outcome.All]
    _check_cells(p, x)
    total = 0.0
    for cell in Outcome.All:
        if form == FisherForm.ANALYTICAL:
            lnp = lambda t, c=cell: np.log(probability(c, t, model))
            total -= p[cell] * second_derivative(lnp, x, h, richardson)
        elif form == FisherForm.METRIC:
            dp = derivative(lambda t, c=cell: probability(c, t, model), x, h, richardson)
            total += dp * dp / p[cell]
        else:
            raise InvalidArgumentError(MODULE_NAME, "unknown Fisher information form %s" % form)
    return float(total)


def channel_capacity(model, grid_points=512):
    ''' I = integral over [0, 2pi) of -sum q q''
    '''
    grid_points = check_grid(grid_points, 64, MODULE_NAME)
    theta = periodic_grid(grid_points)
    amplitudes = AmplitudeSet.epr(model)
    density = -sum(amplitudes.value(o, theta) * amplitudes.second_derivative(o, theta) for o in Outcome.All)
    return float(periodic_trapezoid(density))


def amplitude_norm_integral(outcome, model, grid_points=512):
    ''' integral over [0, 2pi) of q_ab**2, 2pi for every cell
    '''
    grid_points = check_grid(grid_points, 64, MODULE_NAME)
    theta = periodic_grid(grid_points)
    return float(periodic_trapezoid(amplitude(outcome, theta, model) ** 2))


def information_budget(model, grid_points=512):
    ''' I from the channel capacity, Q = -I, K = I + Q with kappa = 1
    '''
    I = channel_capacity(model, grid_points)
    return InformationBudget(I, -I, kappa=1.0)


def shift_symmetry_residual(theta, model):
    ''' |P(++|theta) - P(+-|theta + pi/|n|)|
    '''
    x = as_radians(theta)
    shift = np.pi / abs(model.n)
    return abs(probability(Outcome.PP, x, model) - probability(Outcome.PM, x + shift, model))


def superadditivity_check(theta, model, h=FD_STEP):
    ''' Fisher information of the joint distribution against the sum over both marginals
    @return: Superadditivity(joint, marginal_sum, holds)
    '''
    h = check_step(h, MODULE_NAME)
    x = as_radians(theta)
    joint = fisher_information_closed(model)

    # marginal of each particle: sum over the partner's projection
    up = lambda t: probability(Outcome.PP, t, model) + probability(Outcome.PM, t, model)
    down = lambda t: probability(Outcome.MM, t, model) + probability(Outcome.MP, t, model)
    marginal = 0.0
    for fn in (up, down):
        dp = derivative(fn, x, h)
        marginal += dp * dp / fn(x)
    # both particles have the same marginal
    marginal_sum = 2.0 * float(marginal)
    return Superadditivity(joint, marginal_sum, joint >= marginal_sum)


class MDL_Epr(ModuleBase):
    """
    Closed form EPR-Bohm model
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
        self.grid_points = 512  #: quadrature grid size
        self.fd_step = FD_STEP  #: finite difference step
        self.richardson = False  #: Richardson extrapolation of differences

    def get_module_info(self):
        return "quadrature grid %d, finite difference step %g\n" % (self.grid_points, self.fd_step)

    def probability_table(self, model, thetas):
        ''' Rows of P(S_ab|theta)
        @param thetas: list of angles
        @return: list of dictionaries
        '''
        rows = []
        for theta in thetas:
            row = {"theta": float(as_radians(theta))}
            row.update(joint_distribution(theta, model).as_dict())
            rows.append(row)
        self.send_log("probability table n=%+d, %d rows" % (model.n, len(rows)))
        return rows

    def summary(self, model):
        ''' Angle independent quantities of the model
        '''
        budget = information_budget(model, self.grid_points)
        return {
            "fisher_information": fisher_information_closed(model),
            "channel_capacity": budget.I,
            "budget": budget.as_dict(),
            "averaged_joint": {Outcome.Label[o]: averaged_joint(o, model, self.grid_points) for o in Outcome.All},
            "conditional_given_other": conditional_given_other(model, grid_points=self.grid_points),
            "period": period(model),
        }

    def fisher_forms(self, model, theta):
        ''' Numeric Fisher information at one angle in all three forms,
        with the configured difference step and Richardson setting
        @return: dictionary form name -> value, None where a cell vanishes
        '''
        result = {}
        for form in (FisherForm.ANALYTICAL, FisherForm.METRIC, FisherForm.EPI):
            try:
                result[FisherForm.Name[form]] = fisher_information_numeric(theta, model, form, self.fd_step,
                                                                           self.richardson)
            except DomainError as e:
                self.send_log("%s form singular: %s" % (FisherForm.Name[form], e.info))
                result[FisherForm.Name[form]] = None
        return result

    def getXML(self):
        """ Get module properties for XML configuration file
        @return: objectify XML element::
            <EprModel instance="0" version="1" module="model">
                <grid_points>512</grid_points>
                ...
            </EprModel>
        """
        E = objectify.E
        return self._element("EprModel",
                             E.grid_points(self.grid_points),
                             E.fd_step(self.fd_step),
                             E.richardson(self.richardson),
                             version=self.xmlVersion,
                             instance=self._instance,
                             module="model")

    def setXML(self, xml):
        """ Set module properties from XML configuration file
        @param xml: complete objectify XML configuration tree
        """
        cfg = self._find_configuration(xml, "EprModel", "model")
        if cfg is None:
            return
        try:
            self.grid_points = int(cfg.grid_points.pyval)
            self.fd_step = float(cfg.fd_step.pyval)
            self.richardson = bool(cfg.richardson.pyval)
        except Exception as e:
            self.send_exception(e, severity=ErrorSeverity.NOTIFY)
