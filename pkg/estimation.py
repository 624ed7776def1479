# -*- coding: utf-8 -*-
"""
Angle Estimation Module

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Outer M-draw samples of the joint spin projections, frequency and
maximum likelihood estimators of the analyzer angle, and Monte Carlo
experiments against the lower Rao-Cramer bound 1 / (M n**2).

The angle enters the distribution only through sin**2(n theta / 2), so every
estimator works on the principal branch [0, pi/|n|]. An angle outside the
branch is indistinguishable from its reflection 2pi/|n| - theta.

This file is part of EprInfo
"""

import collections

import numpy as np
from scipy import optimize, stats

from modbase import *
from model import Outcome, SIN_CELLS, as_radians, joint_distribution
from tools.rng import RNG_NAME, check_seed, categorical_counts

MODULE_NAME = "Angle Estimation"

# smallest replication count of a Monte Carlo experiment
MIN_REPLICATIONS = 100

# summation tolerance of a frequency vector
FREQUENCY_TOLERANCE = 1e-15


class EstimatorKind:
    """ Angle estimators
    @ivar CELL_PP: (2/n) arcsin sqrt(2 lambda_++)
    @ivar CELL_MM: (2/n) arcsin sqrt(2 lambda_--)
    @ivar CELL_PM: (2/n) arccos sqrt(2 lambda_+-)
    @ivar CELL_MP: (2/n) arccos sqrt(2 lambda_-+)
    @ivar POOLED_MLE: maximum likelihood over all four cells
    """
    (CELL_PP, CELL_MM, CELL_PM, CELL_MP, POOLED_MLE) = range(5)
    Name = ["pp", "mm", "pm", "mp", "mle"]
    All = (CELL_PP, CELL_MM, CELL_PM, CELL_MP, POOLED_MLE)

    @classmethod
    def parse(cls, text):
        ''' Estimator kind from its short name
        '''
        try:
            return cls.Name.index(str(text).lower())
        except ValueError:
            raise InvalidArgumentError(MODULE_NAME, "unknown estimator '%s', expected one of %s"
                                       % (text, ", ".join(cls.Name)))

    @staticmethod
    def cell(kind):
        ''' Outcome of a per cell estimator, the kinds share the outcome order
        '''
        return kind


Experiment = collections.namedtuple("Experiment", ["bias", "variance", "lrcb", "mean", "replications"])
RcfReport = collections.namedtuple("RcfReport", ["sigma2_IF", "bound", "holds"])


class OuterSample:
    """ Counts of M independent joint spin projections
    """

    def __init__(self, counts, seed=None, theta_true=None, model=None):
        counts = np.array(counts, dtype=np.int64)
        if counts.shape != (4,) or np.any(counts < 0):
            raise InvalidArgumentError(MODULE_NAME, "a sample has four non negative counts, got %s" % counts)
        if counts.sum() < 1:
            raise InvalidArgumentError(MODULE_NAME, "a sample needs at least one draw")
        self.counts = counts
        self.M = int(counts.sum())
        self.seed = seed
        self.theta_true = theta_true
        self.model = model

    def as_dict(self):
        return {
            "counts": {Outcome.Label[o]: int(self.counts[o]) for o in Outcome.All},
            "M": self.M,
            "seed": self.seed,
            "theta_true": self.theta_true,
            "n": None if self.model is None else self.model.n,
        }


class FrequencyVector:
    """ Relative frequencies lambda_hat of the four outcomes
    """

    def __init__(self, lambda_hat):
        lambda_hat = np.array(lambda_hat, dtype=float)
        if lambda_hat.shape != (4,) or np.any(lambda_hat < 0.0) or np.any(lambda_hat > 1.0):
            raise InvalidArgumentError(MODULE_NAME, "frequencies must be four values in [0, 1]")
        if abs(lambda_hat.sum() - 1.0) > FREQUENCY_TOLERANCE:
            raise InvalidArgumentError(MODULE_NAME, "frequencies do not sum to 1: %s" % lambda_hat)
        self.lambda_hat = lambda_hat

    def __getitem__(self, outcome):
        return self.lambda_hat[outcome]


class EstimationReport:
    """ Point estimate with its standard error and a normal approximation interval
    """

    def __init__(self, theta_hat, estimator_kind, std_error, lrcb, ci_low, ci_high, confidence, M):
        self.theta_hat = float(theta_hat)
        self.estimator_kind = estimator_kind
        self.std_error = float(std_error)
        self.lrcb = float(lrcb)
        self.ci_low = float(ci_low)
        self.ci_high = float(ci_high)
        self.confidence = float(confidence)
        self.M = int(M)

    def as_dict(self):
        return {
            "estimator": EstimatorKind.Name[self.estimator_kind],
            "theta_hat": self.theta_hat,
            "std_error": self.std_error,
            "lrcb": self.lrcb,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "M": self.M,
        }


def principal_branch(model):
    ''' Interval [0, pi/|n|] on which sin**2(n theta / 2) is invertible
    '''
    return 0.0, np.pi / abs(model.n)


def _check_samples(M):
    if int(M) != M or M < 1:
        raise InvalidArgumentError(MODULE_NAME, "sample size M must be an integer >= 1, got %s" % M)
    return int(M)


def _check_open_branch(theta, model):
    x = as_radians(theta)
    lo, hi = principal_branch(model)
    if not (lo < x < hi):
        raise SingularBranchError(MODULE_NAME, "theta=%.17g is not inside the open principal branch (0, %.17g)"
                                  % (x, hi))
    return x


def sample(theta, model, M, seed, stream=0):
    ''' Draw M independent joint spin projections
    @param theta: analyzer angle
    @param model: SpinModel
    @param M: sample size
    @param seed: 64-bit master seed
    @param stream: generator stream, 0 for a single sample
    @return: OuterSample
    '''
    M = _check_samples(M)
    seed = check_seed(seed, MODULE_NAME)
    p = joint_distribution(theta, model).p
    counts = categorical_counts(p, M, seed, stream)
    return OuterSample(counts, seed=seed, theta_true=float(as_radians(theta)), model=model)


def frequencies(outer):
    return FrequencyVector(outer.counts / outer.M)


def _cell_estimate(lambda_hat, cell, n):
    # clamp: sampling noise pushes lambda_hat above 1/2
    root = np.sqrt(np.clip(2.0 * lambda_hat, 0.0, 1.0))
    if cell in SIN_CELLS:
        return 2.0 / abs(n) * np.arcsin(root)
    return 2.0 / abs(n) * np.arccos(root)


def estimate_cell(freq, cell, model):
    ''' Angle from the frequency of a single outcome
    @param freq: FrequencyVector
    @param cell: Outcome
    @return: estimate on the principal branch
    '''
    return float(_cell_estimate(freq[cell], cell, model.n))


def _mle_estimate(sin_counts, M, n):
    return 2.0 / abs(n) * np.arcsin(np.sqrt(np.clip(sin_counts / M, 0.0, 1.0)))


def estimate_mle(outer):
    ''' Pooled maximum likelihood estimate, (2/n) arcsin sqrt((c_++ + c_--) / M)
    '''
    sin_counts = outer.counts[Outcome.PP] + outer.counts[Outcome.MM]
    return float(_mle_estimate(sin_counts, outer.M, outer.model.n))


def estimate(outer, kind):
    ''' Apply the selected estimator to a sample
    '''
    if kind == EstimatorKind.POOLED_MLE:
        return estimate_mle(outer)
    return estimate_cell(frequencies(outer), EstimatorKind.cell(kind), outer.model)


def lrcb(M, model):
    ''' Lower Rao-Cramer bound 1 / (M n**2)
    '''
    return 1.0 / (_check_samples(M) * model.n ** 2)


def delta_variance_cell(theta, model, M, cell):
    ''' Asymptotic variance of a per cell estimator.
    (1 + c**2) / (M n**2 c**2) for ++ and -- with c = cos(n theta / 2),
    (1 + s**2) / (M n**2 s**2) for +- and -+ with s = sin(n theta / 2).
    '''
    M = _check_samples(M)
    x = _check_open_branch(theta, model)
    half = 0.5 * model.n * x
    w = np.cos(half) ** 2 if cell in SIN_CELLS else np.sin(half) ** 2
    return float((1.0 + w) / (M * model.n ** 2 * w))


def log_likelihood(outer, theta):
    ''' sum c_j ln P(j|theta), -inf if a counted cell has zero probability
    '''
    p = joint_distribution(theta, outer.model).p
    total = 0.0
    for cell in Outcome.All:
        if outer.counts[cell] == 0:
            continue
        if p[cell] <= 0.0:
            return -np.inf
        total += outer.counts[cell] * np.log(p[cell])
    return float(total)


def score(outer, theta):
    ''' Derivative of the log-likelihood,
    u n cot(n theta / 2) - v n tan(n theta / 2) with u, v the sin and cos cell counts
    '''
    x = 0.5 * outer.model.n * as_radians(theta)
    u = outer.counts[Outcome.PP] + outer.counts[Outcome.MM]
    v = outer.M - u
    n = outer.model.n
    return float(u * n * np.cos(x) / np.sin(x) - v * n * np.sin(x) / np.cos(x))


def estimate_mle_numeric(outer, xatol=1e-10):
    ''' Maximize the log-likelihood on the principal branch with a bounded scalar search
    '''
    lo, hi = principal_branch(outer.model)
    result = optimize.minimize_scalar(lambda t: -log_likelihood(outer, t),
                                      bounds=(lo, hi), method="bounded",
                                      options={"xatol": xatol})
    return float(result.x)


def replicate_counts(theta, model, M, replications, seed, workers=1):
    ''' Count matrix of independent samples, replication i on stream i + 1
    @return: integer array of shape (replications, 4)
    '''
    M = _check_samples(M)
    seed = check_seed(seed, MODULE_NAME)
    if int(replications) != replications or replications < 1:
        raise InvalidArgumentError(MODULE_NAME, "replications must be an integer >= 1, got %s" % replications)
    p = joint_distribution(theta, model).p
    rows = process_parallel(lambda i: categorical_counts(p, M, seed, i + 1), int(replications), workers)
    return np.vstack(rows)


def estimate_counts(counts, kind, model):
    ''' Vectorized estimator over a (replications, 4) count matrix
    '''
    counts = np.asarray(counts)
    M = counts.sum(axis=1)
    if kind == EstimatorKind.POOLED_MLE:
        return _mle_estimate(counts[:, Outcome.PP] + counts[:, Outcome.MM], M, model.n)
    cell = EstimatorKind.cell(kind)
    return _cell_estimate(counts[:, cell] / M, cell, model.n)


def unbiasedness_experiment(theta, model, M, replications, seed, estimator=EstimatorKind.POOLED_MLE, workers=1):
    ''' Monte Carlo bias and variance of an estimator
    @param theta: true angle inside the open principal branch
    @param replications: number of independent samples, at least 100
    @param seed: master seed, replication i draws from stream i + 1
    @param estimator: EstimatorKind
    @param workers: number of sampling threads, results do not depend on it
    @return: Experiment(bias, variance, lrcb, mean, replications)
    '''
    if int(replications) != replications or replications < MIN_REPLICATIONS:
        raise InvalidArgumentError(MODULE_NAME, "replications must be an integer >= %d, got %s"
                                   % (MIN_REPLICATIONS, replications))
    x = _check_open_branch(theta, model)
    counts = replicate_counts(x, model, M, replications, seed, workers)
    estimates = estimate_counts(counts, estimator, model)
    mean = float(np.mean(estimates))
    return Experiment(bias=mean - x,
                      variance=float(np.var(estimates, ddof=1)),
                      lrcb=lrcb(M, model),
                      mean=mean,
                      replications=int(replications))


def rcf_inequality_report(theta, model, M, replications, seed, workers=1):
    ''' Empirical sigma**2 I_F of the pooled estimator against 1/M.
    For M = 1 this is the single draw form sigma**2 I_F >= 1.
    @return: RcfReport(sigma2_IF, bound, holds)
    '''
    experiment = unbiasedness_experiment(theta, model, M, replications, seed, EstimatorKind.POOLED_MLE, workers)
    sigma2_IF = experiment.variance * model.n ** 2
    bound = 1.0 / M
    holds = sigma2_IF >= bound * (1.0 - 3.0 / np.sqrt(replications))
    return RcfReport(float(sigma2_IF), bound, bool(holds))


def local_unbiasedness_slope(theta, model, M, replications, seed, estimator=EstimatorKind.POOLED_MLE,
                             dtheta=0.01, workers=1):
    ''' (E[theta_hat | theta + d] - E[theta_hat | theta - d]) / 2d, tends to 1.
    Both experiments share the seed.
    '''
    x = as_radians(theta)
    if not dtheta > 0.0:
        raise InvalidArgumentError(MODULE_NAME, "dtheta must be positive, got %s" % dtheta)
    upper = unbiasedness_experiment(x + dtheta, model, M, replications, seed, estimator, workers)
    lower = unbiasedness_experiment(x - dtheta, model, M, replications, seed, estimator, workers)
    return (upper.mean - lower.mean) / (2.0 * dtheta)


def estimation_report(outer, estimator=EstimatorKind.POOLED_MLE, confidence=0.95):
    ''' Estimate with standard error and interval clipped to the principal branch.
    The pooled estimator attains the bound, its standard error is sqrt(lrcb).
    A per cell estimate at a branch endpoint has an infinite standard error.
    '''
    if not (0.0 < confidence < 1.0):
        raise InvalidArgumentError(MODULE_NAME, "confidence must be in (0, 1), got %s" % confidence)
    model = outer.model
    theta_hat = estimate(outer, estimator)
    bound = lrcb(outer.M, model)
    if estimator == EstimatorKind.POOLED_MLE:
        std_error = np.sqrt(bound)
    else:
        try:
            std_error = np.sqrt(delta_variance_cell(theta_hat, model, outer.M, EstimatorKind.cell(estimator)))
        except SingularBranchError:
            std_error = np.inf
    z = stats.norm.ppf(0.5 + 0.5 * confidence)
    lo, hi = principal_branch(model)
    if np.isfinite(std_error):
        ci_low = max(lo, theta_hat - z * std_error)
        ci_high = min(hi, theta_hat + z * std_error)
    else:
        ci_low, ci_high = lo, hi
    return EstimationReport(theta_hat, estimator, std_error, bound, ci_low, ci_high, confidence, outer.M)


class EST_Angle(ModuleBase):
    """
    Angle estimation from simulated outer samples
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
        self.samples = 10000  #: outer sample size M
        self.replications = 10000  #: Monte Carlo replications
        self.seed = 7  #: master seed
        self.confidence = 0.95  #: interval coverage
        self.workers = 1  #: sampling threads

    def get_module_info(self):
        return "M=%d, %d replications, seed %d, %s\n" % (self.samples, self.replications, self.seed, RNG_NAME)

    def simulate(self, theta, model, M=None, seed=None):
        ''' Draw one outer sample
        '''
        M = self.samples if M is None else M
        seed = self.seed if seed is None else seed
        outer = sample(theta, model, M, seed)
        self.send_log("sample n=%+d theta=%.17g M=%d seed=%d" % (model.n, outer.theta_true, outer.M, outer.seed))
        return outer

    def estimate(self, theta, model, estimators=EstimatorKind.All, M=None, seed=None):
        ''' Draw one sample and apply the requested estimators
        @return: (OuterSample, list of EstimationReport)
        '''
        outer = self.simulate(theta, model, M, seed)
        reports = [estimation_report(outer, kind, self.confidence) for kind in estimators]
        for r in reports:
            self.send_event(ModuleEvent(self._object_name, EventType.STATUS,
                                        "%s: theta_hat=%.17g +- %.3g" % (EstimatorKind.Name[r.estimator_kind],
                                                                          r.theta_hat, r.std_error),
                                        status_field="Estimate"))
        return outer, reports

    def experiment(self, theta, model, estimator=EstimatorKind.POOLED_MLE, M=None, replications=None, seed=None):
        ''' Monte Carlo bias and variance with the configured defaults
        '''
        M = self.samples if M is None else M
        replications = self.replications if replications is None else replications
        seed = self.seed if seed is None else seed
        result = unbiasedness_experiment(theta, model, M, replications, seed, estimator, self.workers)
        self.send_log("experiment %s n=%+d M=%d R=%d: bias=%.3g variance=%.6g lrcb=%.6g"
                      % (EstimatorKind.Name[estimator], model.n, M, replications,
                         result.bias, result.variance, result.lrcb))
        return result

    def getXML(self):
        """ Get module properties for XML configuration file
        @return: objectify XML element::
            <AngleEstimation instance="0" version="1" module="estimation">
                <samples>10000</samples>
                ...
            </AngleEstimation>
        """
        E = objectify.E
        return self._element("AngleEstimation",
                             E.samples(self.samples),
                             E.replications(self.replications),
                             E.seed(self.seed),
                             E.confidence(self.confidence),
                             E.workers(self.workers),
                             version=self.xmlVersion,
                             instance=self._instance,
                             module="estimation")

    def setXML(self, xml):
        """ Set module properties from XML configuration file
        @param xml: complete objectify XML configuration tree
        """
        cfg = self._find_configuration(xml, "AngleEstimation", "estimation")
        if cfg is None:
            return
        try:
            self.samples = int(cfg.samples.pyval)
            self.replications = int(cfg.replications.pyval)
            self.seed = int(cfg.seed.pyval)
            self.confidence = float(cfg.confidence.pyval)
            self.workers = int(cfg.workers.pyval)
        except Exception as e:
            self.send_exception(e, severity=ErrorSeverity.NOTIFY)
