# -*- coding: utf-8 -*-
"""
Acceptance Module

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Runs the numerical acceptance criteria of the toolkit: closed form table,
Fisher constancy, capacities, solver pipeline, geometry, generic ratio,
Monte Carlo estimation, single draw bound and sample determinism.

This file is part of EprInfo
"""

import time

import numpy as np

from modbase import *
from model import Outcome, SpinModel, FisherForm, probability, fisher_information_numeric, information_budget, \
    amplitude_norm_integral
from solver import solve_amplitude_constants, GeneratingEquation, solve_generating_ode, \
    principle_residual_maxima, generic_ratio
from geometry import SimplexPoint, epr_curve, metric_constancy_scan, to_amplitudes, simplex_metric, \
    metric_on_lambda_space, induced_metric, InducedForm
from estimation import EstimatorKind, sample, unbiasedness_experiment, delta_variance_cell, \
    rcf_inequality_report
from tools.numerics import TWO_PI
from tools.rng import uniforms
from tools import report

MODULE_NAME = "Acceptance"

MODELS = (SpinModel(1), SpinModel(-1), SpinModel(2), SpinModel(-2))


class Criterion:
    """ Result of a single acceptance criterion
    """

    def __init__(self, number, name):
        self.number = number
        self.name = name
        self.checks = {}  #: name -> (value, passed)
        self.error = None
        self.runtime = 0.0

    def check(self, name, value, passed):
        self.checks[name] = (value, bool(passed))

    @property
    def passed(self):
        return self.error is None and len(self.checks) > 0 and all(ok for _, ok in self.checks.values())

    def as_dict(self):
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": self.passed,
            "runtime": self.runtime,
            "checks": {k: {"value": v, "passed": ok} for k, (v, ok) in self.checks.items()},
            "error": self.error,
        }


class VER_Acceptance(ModuleBase):
    """
    Acceptance suite
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
        self.seed = 7  #: master seed of the random angles and samples
        self.samples = 10000  #: outer sample size of the estimation criterion
        self.replications = 10000  #: replications of the estimation criterion
        self.single_draw_replications = 100000  #: replications of the M = 1 criterion
        self.quick_replications = 2000  #: replications with --quick
        self.workers = 1  #: sampling threads

    def get_module_info(self):
        return "M=%d, R=%d, single draw R=%d\n" % (self.samples, self.replications, self.single_draw_replications)

    def run(self, quick=False, select=None):
        ''' Evaluate the acceptance criteria
        @param quick: reduced replication counts
        @param select: optional list of criterion numbers, default all
        @return: report dictionary, "passed" is true if every criterion passed
        '''
        criteria = [
            (1, "closed form table", self._closed_form_table),
            (2, "fisher constancy", self._fisher_constancy),
            (3, "capacities", self._capacities),
            (4, "solver pipeline", self._solver_pipeline),
            (5, "geometry", self._geometry),
            (6, "generic ratio", self._generic_ratio),
            (7, "estimation", lambda c: self._estimation(c, quick)),
            (8, "single draw bound", lambda c: self._single_draw(c, quick)),
            (9, "determinism", self._determinism),
        ]
        results = []
        for number, name, fn in criteria:
            if select is not None and number not in select:
                continue
            criterion = Criterion(number, name)
            start = time.perf_counter()
            try:
                fn(criterion)
            except Exception as e:
                criterion.error = str(e)
                self.send_exception(e, severity=ErrorSeverity.NOTIFY)
            criterion.runtime = time.perf_counter() - start
            self.send_event(ModuleEvent(self._object_name, EventType.LOGMESSAGE if not criterion.passed
                                        else EventType.LOG,
                                        "criterion %d (%s): %s" % (number, name,
                                                                   "passed" if criterion.passed else "FAILED")))
            results.append(criterion)
        return {
            "quick": bool(quick),
            "passed": all(c.passed for c in results),
            "criteria": [c.as_dict() for c in results],
        }

    def _random_angles(self, count, stream, lo=0.0, hi=TWO_PI):
        return lo + (hi - lo) * uniforms(self.seed, stream, count)

    def _closed_form_table(self, c):
        n1, n2 = SpinModel(1), SpinModel(2)
        c.check("P(++|0)", probability(Outcome.PP, 0.0, n1), probability(Outcome.PP, 0.0, n1) == 0.0)
        c.check("P(+-|pi), n=1", probability(Outcome.PM, np.pi, n1), probability(Outcome.PM, np.pi, n1) == 0.0)
        c.check("P(+-|pi/2), n=2", probability(Outcome.PM, np.pi / 2, n2),
                probability(Outcome.PM, np.pi / 2, n2) == 0.0)
        theta = self._random_angles(1000, 1)
        worst = 0.0
        for model in MODELS:
            total = sum(probability(o, theta, model) for o in Outcome.All)
            worst = max(worst, float(np.max(np.abs(total - 1.0))))
        c.check("normalization", worst, worst < 1e-12)

    def _fisher_constancy(self, c):
        # angles with |cos(n theta)| <= 0.8 keep every cell at P >= 0.05
        for stream, model in enumerate(MODELS, start=2):
            cosines = -0.8 + 1.6 * uniforms(self.seed, stream, 100)
            theta = np.arccos(cosines) / abs(model.n)
            for form in (FisherForm.ANALYTICAL, FisherForm.METRIC, FisherForm.EPI):
                error = max(abs(fisher_information_numeric(t, model, form) - model.n ** 2) for t in theta)
                c.check("n=%+d %s" % (model.n, FisherForm.Name[form]), error, error < 1e-6)

    def _capacities(self, c):
        for model in MODELS:
            expected = 2.0 * np.pi * model.n ** 2
            budget = information_budget(model)
            c.check("I n=%+d" % model.n, budget.I, abs(budget.I - expected) < 1e-8)
            c.check("K n=%+d" % model.n, budget.K, abs(budget.K) < 1e-8 and abs(budget.Q + budget.I) < 1e-8)
            norm = max(abs(amplitude_norm_integral(o, model) - TWO_PI) for o in Outcome.All)
            c.check("norm n=%+d" % model.n, norm, norm < 1e-10)

    def _solver_pipeline(self, c):
        root2 = np.sqrt(2.0)
        for model in MODELS:
            result = solve_amplitude_constants(model.n)
            ok = (result.C[Outcome.PP] == 0.0 and result.C[Outcome.MM] == 0.0
                  and result.B[Outcome.PM] == 0.0 and result.B[Outcome.MP] == 0.0
                  and abs(result.B[Outcome.PP] - root2) < 1e-15 and abs(result.C[Outcome.PM] - root2) < 1e-15)
            c.check("constants n=%+d" % model.n, result.residual, ok and result.residual < 1e-10)

            amplitudes = result.amplitudes()
            eq = GeneratingEquation.for_model(model)
            error = 0.0
            for cell in (Outcome.PP, Outcome.PM):
                sol = solve_generating_ode(eq, amplitudes.value(cell, 0.0), amplitudes.first_derivative(cell, 0.0))
                error = max(error, float(np.max(np.abs(sol.values - amplitudes.value(cell, sol.grid)))))
            c.check("rk4 n=%+d" % model.n, error, error < 1e-6)

            structural, euler = principle_residual_maxima(model, amplitude=amplitudes.value)
            c.check("principles n=%+d" % model.n, max(structural, euler), max(structural, euler) < 1e-6)

            # 5% frequency perturbation
            perturbed = lambda o, t: amplitudes.value(o, 1.05 * t)
            structural, euler = principle_residual_maxima(model, amplitude=perturbed)
            c.check("perturbed n=%+d" % model.n, min(structural, euler), min(structural, euler) > 1e-3)

    def _geometry(self, c):
        for model in MODELS:
            lo, hi = metric_constancy_scan(epr_curve(model), 512)
            c.check("scan n=%+d" % model.n, hi - lo,
                    hi - lo < 1e-8 and abs(lo - model.n ** 2) < 1e-8 and abs(hi - model.n ** 2) < 1e-8)

            curve = epr_curve(model)
            theta = 0.3 / abs(model.n)
            dp = curve.d_probabilities(theta)
            g_lambda = float(dp @ metric_on_lambda_space(curve.point(theta)) @ dp)
            c.check("g_lambda n=%+d" % model.n, g_lambda,
                    abs(g_lambda - induced_metric(curve, theta, InducedForm.RATIO)) < 1e-10)

        raw = uniforms(self.seed, 10, 400).reshape(100, 4) + 1e-3
        radius, identity = 0.0, True
        for row in raw:
            point = SimplexPoint(row / row.sum())
            q = to_amplitudes(point).q
            radius = max(radius, abs(float(np.sum(q * q)) - 4.0))
            identity = identity and np.array_equal(metric_on_lambda_space(point), simplex_metric(point))
        c.check("sphere radius", radius, radius < 1e-12)
        c.check("lambda metric identity", identity, identity)

    def _generic_ratio(self, c):
        theta = self._random_angles(32, 11, 0.05, TWO_PI - 0.05)
        for t in (0.1, 0.5, 2.0, 10.0):
            for n in (1, 2):
                error = max(abs(generic_ratio(t, n, x) - n ** 2) for x in theta)
                c.check("t=%g n=%d" % (t, n), error, error < 1e-10)

    def _estimation(self, c, quick):
        R = self.quick_replications if quick else self.replications
        M = self.samples
        bounds = []
        for model in (SpinModel(1), SpinModel(2)):
            mle = unbiasedness_experiment(1.0, model, M, R, self.seed, EstimatorKind.POOLED_MLE, self.workers)
            bounds.append(mle.lrcb)
            c.check("mle bias n=%d" % model.n, mle.bias, abs(mle.bias) < 3.0 * np.sqrt(mle.variance / R))
            c.check("mle variance n=%d" % model.n, mle.variance, abs(mle.variance / mle.lrcb - 1.0) < 0.1)

            cell = unbiasedness_experiment(1.0, model, M, R, self.seed, EstimatorKind.CELL_PP, self.workers)
            oracle = delta_variance_cell(1.0, model, M, Outcome.PP)
            c.check("cell variance n=%d" % model.n, cell.variance,
                    abs(cell.variance / oracle - 1.0) < 0.1 and cell.variance >= cell.lrcb)
        c.check("lrcb ratio n=2 / n=1", bounds[1] / bounds[0], abs(bounds[1] / bounds[0] - 0.25) < 1e-15)

    def _single_draw(self, c, quick):
        R = self.quick_replications * 5 if quick else self.single_draw_replications
        for model in (SpinModel(1), SpinModel(2)):
            rcf = rcf_inequality_report(1.0, model, 1, R, self.seed, self.workers)
            c.check("sigma2 I_F n=%d" % model.n, rcf.sigma2_IF, rcf.holds and rcf.bound == 1.0)

    def _determinism(self, c):
        texts = []
        for _ in range(2):
            outer = sample(1.0, SpinModel(1), self.samples, self.seed)
            texts.append(report.dumps(outer.as_dict()))
        c.check("identical samples", len(texts[0]), texts[0] == texts[1])

    def getXML(self):
        """ Get module properties for XML configuration file
        @return: objectify XML element::
            <Acceptance instance="0" version="1" module="verify">
                <seed>7</seed>
                ...
            </Acceptance>
        """
        E = objectify.E
        return self._element("Acceptance",
                             E.seed(self.seed),
                             E.samples(self.samples),
                             E.replications(self.replications),
                             E.single_draw_replications(self.single_draw_replications),
                             E.quick_replications(self.quick_replications),
                             version=self.xmlVersion,
                             instance=self._instance,
                             module="verify")

    def setXML(self, xml):
        """ Set module properties from XML configuration file
        @param xml: complete objectify XML configuration tree
        """
        cfg = self._find_configuration(xml, "Acceptance", "verify")
        if cfg is None:
            return
        try:
            self.seed = int(cfg.seed.pyval)
            self.samples = int(cfg.samples.pyval)
            self.replications = int(cfg.replications.pyval)
            self.single_draw_replications = int(cfg.single_draw_replications.pyval)
            self.quick_replications = int(cfg.quick_replications.pyval)
        except Exception as e:
            self.send_exception(e, severity=ErrorSeverity.NOTIFY)
