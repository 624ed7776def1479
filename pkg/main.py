# -*- coding: utf-8 -*-
"""
Main Application

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Command line front end. Usage:

    python -m main <command> [options]

Commands:
 - probabilities: P(S_ab|theta) table on an angle grid or at --theta
 - solve: amplitude constants, ODE check and principle residuals
 - metric: constancy scan of the induced Rao-Fisher metric
 - simulate: counts of one outer sample
 - estimate: angle estimates with standard errors and intervals
 - verify: acceptance suite, nonzero exit code on failure

Available modules:
 - EPR-Bohm model: MDL_Epr
 - EPI solver: SLV_Epi
 - Simplex geometry: GEO_Simplex
 - Angle estimation: EST_Angle
 - Acceptance suite: VER_Acceptance

Exit codes: 0 success, 1 computation or configuration error
(a JSON error record is written to stderr), 2 usage error.
"""

import argparse
import os
import sys

import importlib_resources
from lxml import etree, objectify
from packaging import version as pkg_version

from modbase import *
from model import MDL_Epr, SpinModel, Angle
from solver import SLV_Epi
from geometry import GEO_Simplex
from estimation import EST_Angle, EstimatorKind, frequencies, rcf_inequality_report
from verify import VER_Acceptance
from tools.numerics import periodic_grid
from tools.rng import RNG_NAME
from tools import report

NAME_APPLICATION = "EprInfo"
__version__ = "1.0.0"

COMMANDS = ["probabilities", "solve", "metric", "simulate", "estimate", "verify"]


def InstantiateModules():
    """
    Instantiate the computation modules
    @return: list with instantiated module objects
    """
    modules = [
        MDL_Epr(),
        SLV_Epi(),
        GEO_Simplex(),
        EST_Angle(),
        VER_Acceptance(),
    ]
    return modules


class Application:
    """
    Module handling, configuration and command dispatch
    """

    def __init__(self, echo=None):
        ''' Create the modules and connect them to the event log
        @param echo: optional text stream for ERROR and LOGMESSAGE events
        '''
        self.log = EventLog(NAME_APPLICATION, __version__, echo=echo)
        self.modules = InstantiateModules()
        for module in self.modules:
            module.add_receiver(self.log)
        self.model, self.solver, self.geometry, self.estimation, self.verification = self.modules
        self.defaultConfiguration()

    def processEvent(self, event):
        self.log(event)

    def defaultConfiguration(self):
        """ Set default values for all modules, then apply the packaged defaults file
        """
        for module in self.modules:
            module.setDefault()
        defaults = importlib_resources.files("res").joinpath("defaults.xml")
        with importlib_resources.as_file(defaults) as filename:
            self._loadConfiguration(str(filename))
        self.processEvent(ModuleEvent("Application", EventType.STATUS, info="default", status_field="Workspace"))

    def _loadConfiguration(self, filename):
        """ Load module configuration from XML file
        @param filename: full qualified XML file name
        """
        try:
            cfg = objectify.parse(filename)
        except (OSError, etree.XMLSyntaxError) as e:
            raise InvalidArgumentError("Load Configuration", "%s: %s" % (filename, e))

        # check application and version
        app = cfg.xpath("//%s" % NAME_APPLICATION)
        if (len(app) == 0) or (app[0].get("version") is None):
            raise InvalidArgumentError("Load Configuration",
                                       "%s is not a valid %s configuration file" % (filename, NAME_APPLICATION))

        file_version = pkg_version.parse(app[0].get("version"))
        own_version = pkg_version.parse(__version__)
        if file_version.release[:2] > own_version.release[:2]:
            raise InvalidArgumentError("Load Configuration", "%s wrong version %s > %s"
                                       % (filename, file_version, own_version))

        # setup modules from configuration file
        known_errors = len(self.log.errors(ErrorSeverity.NOTIFY))
        for module in self.modules:
            module.setXML(cfg)

        # stop on rejected module entries
        errors = self.log.errors(ErrorSeverity.NOTIFY)
        if len(errors) > known_errors:
            raise InvalidArgumentError("Load Configuration", "%s: %s" % (filename, errors[-1].info))

        file_name, ext = os.path.splitext(os.path.split(filename)[1])
        self.processEvent(ModuleEvent("Application", EventType.LOG, info="configuration " + file_name))

    def _saveConfiguration(self, filename):
        """ Save module configuration to XML file
        @param filename: full qualified XML file name
        """
        E = objectify.E
        modules = E.modules()
        # get configuration from each module
        for module in self.modules:
            cfg = module.getXML()
            if cfg is not None:
                modules.append(cfg)
        # build complete configuration tree
        root = getattr(E, NAME_APPLICATION)(modules, version=__version__)
        objectify.deannotate(root, cleanup_namespaces=True)
        etree.ElementTree(root).write(filename, pretty_print=True, xml_declaration=True, encoding="UTF-8")

    def updateModuleInfo(self):
        """ Put the module information into the log header
        """
        self.log.moduleinfo = ""
        for module in self.modules:
            info = module.get_module_info()
            if info is not None:
                self.log.moduleinfo += module._object_name + "\n"
                self.log.moduleinfo += info
        if len(self.log.moduleinfo) > 0:
            self.log.moduleinfo += "\n\n"

    def applyArguments(self, args):
        """ Explicit command line flags override configuration values
        @param args: parsed argparse namespace
        """
        if args.grid_points is not None:
            self.model.grid_points = args.grid_points
            self.geometry.scan_points = args.grid_points
        if args.samples is not None:
            self.estimation.samples = args.samples
            self.verification.samples = args.samples
        if args.replications is not None:
            self.estimation.replications = args.replications
            self.verification.replications = args.replications
        if args.seed is not None:
            self.estimation.seed = args.seed
            self.verification.seed = args.seed
        if args.workers is not None:
            self.estimation.workers = args.workers
            self.verification.workers = args.workers

    def run(self, args):
        """ Execute a parsed command
        @param args: parsed argparse namespace
        @return: tuple(report record, csv rows, exit code)
        """
        model = SpinModel(args.n)
        theta = None
        if args.theta is not None:
            theta = float(Angle.from_degrees(args.theta) if args.degrees else Angle(args.theta))
        inputs = {"n": model.n, "theta": theta}
        seed = None

        if args.command == "probabilities":
            thetas = [theta] if theta is not None else list(periodic_grid(self.model.grid_points))
            rows = self.model.probability_table(model, thetas)
            outputs = {"rows": rows, "summary": self.model.summary(model)}
            if theta is not None:
                outputs["fisher_numeric"] = self.model.fisher_forms(model, theta)
            inputs["grid_points"] = self.model.grid_points
            code = 0

        elif args.command == "solve":
            outputs = self.solver.solve(model.n)
            rows = [{"outcome": label,
                     "B": outputs["B"][label],
                     "C": outputs["C"][label],
                     "boundary_constant": outputs["boundary_constants"][label]}
                    for label in outputs["B"]]
            code = 0

        elif args.command == "metric":
            outputs = self.geometry.scan(model)
            rows = outputs["rows"]
            inputs["grid_points"] = self.geometry.scan_points
            code = 0

        elif args.command == "simulate":
            outer = self.estimation.simulate(theta, model)
            freq = frequencies(outer)
            outputs = outer.as_dict()
            outputs["frequencies"] = {k: float(freq[i]) for i, k in enumerate(outputs["counts"])}
            rows = [{"outcome": k, "count": v, "frequency": outputs["frequencies"][k]}
                    for k, v in outputs["counts"].items()]
            inputs["samples"] = outer.M
            seed = outer.seed
            code = 0

        elif args.command == "estimate":
            kinds = [EstimatorKind.parse(e) for e in args.estimator] if args.estimator else list(EstimatorKind.All)
            outer, reports = self.estimation.estimate(theta, model, kinds)
            outputs = {"sample": outer.as_dict(), "estimates": [r.as_dict() for r in reports]}
            rows = [r.as_dict() for r in reports]
            if args.replications is not None:
                experiments = []
                for kind in kinds:
                    result = self.estimation.experiment(theta, model, kind)
                    experiments.append({"estimator": EstimatorKind.Name[kind],
                                        "bias": result.bias,
                                        "variance": result.variance,
                                        "lrcb": result.lrcb,
                                        "replications": result.replications})
                rcf = rcf_inequality_report(theta, model, outer.M, self.estimation.replications,
                                            self.estimation.seed, self.estimation.workers)
                outputs["experiments"] = experiments
                outputs["rcf"] = rcf._asdict()
                inputs["replications"] = self.estimation.replications
            inputs["samples"] = outer.M
            inputs["estimators"] = [EstimatorKind.Name[k] for k in kinds]
            seed = outer.seed
            code = 0

        else:
            outputs = self.verification.run(quick=args.quick)
            rows = [{"criterion": c["criterion"], "name": c["name"], "passed": c["passed"],
                     "runtime": c["runtime"]} for c in outputs["criteria"]]
            inputs["quick"] = bool(args.quick)
            seed = self.verification.seed
            code = 0 if outputs["passed"] else 1

        record = {
            "command": args.command,
            "inputs": inputs,
            "outputs": outputs,
            "versions": {"eprinfo": __version__, "rng": RNG_NAME},
            "seed": seed,
        }
        return record, rows, code


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer, got %s" % text)
    return value


def _seed(text):
    value = int(text)
    if not (0 <= value < 2 ** 64):
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64), got %s" % text)
    return value


def build_parser():
    """ Argument parser with one sub command per report
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, choices=[-2, -1, 1, 2],
                        help="quantum number, +-1 (spin 1/2) or +-2 (spin 1)")
    common.add_argument("--theta", type=float, default=None, help="analyzer angle in radians")
    common.add_argument("--degrees", action="store_true", help="--theta is given in degrees")
    common.add_argument("--samples", type=_positive_int, default=None, help="outer sample size M")
    common.add_argument("--replications", type=_positive_int, default=None, help="Monte Carlo replications")
    common.add_argument("--seed", type=_seed, default=None, help="64-bit master seed")
    common.add_argument("--grid-points", type=_positive_int, default=None, help="angle grid size")
    common.add_argument("--estimator", action="append", choices=EstimatorKind.Name, default=None,
                        help="estimator, repeat for several (default all)")
    common.add_argument("--workers", type=_positive_int, default=None, help="sampling threads")
    common.add_argument("--quick", action="store_true", help="verify with reduced replication counts")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="report format")
    common.add_argument("--output", default=None, help="write the report to this file instead of stdout")
    common.add_argument("--config", default=None, help="load an XML configuration file")
    common.add_argument("--save-config", default=None, help="write the effective configuration to this file")
    common.add_argument("--log", default=None, help="write the event log to this file")
    common.add_argument("--verbose", action="store_true", help="echo errors and messages to stderr")

    parser = argparse.ArgumentParser(prog="eprinfo",
                                     description="%s V%s, information principles of the EPR-Bohm experiment"
                                                 % (NAME_APPLICATION, __version__))
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for command in COMMANDS:
        sub.add_parser(command, parents=[common])
    return parser


def main(argv=None):
    """
    Parse the command line, run the command and write the report
    @return: process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("simulate", "estimate") and args.theta is None:
        parser.error("%s requires --theta" % args.command)

    app = None
    try:
        app = Application(echo=sys.stderr if args.verbose else None)
        if args.config is not None:
            app._loadConfiguration(args.config)
        app.applyArguments(args)
        app.updateModuleInfo()
        if args.save_config is not None:
            app._saveConfiguration(args.save_config)

        record, rows, code = app.run(args)
        text = report.dumps(record) if args.format == "json" else report.dumps_csv(rows)
        if args.output is not None:
            with open(args.output, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
    except ModuleError as e:
        if app is not None:
            app.processEvent(ModuleEvent(e.module, EventType.ERROR, e.info, severity=ErrorSeverity.STOP))
        sys.stderr.write(report.dumps_line(e.record()))
        code = 1
    except Exception as e:
        tb = GetExceptionTraceBack()[0]
        if app is not None:
            app.processEvent(ModuleEvent(NAME_APPLICATION, EventType.ERROR, tb + " -> " + str(e),
                                         severity=ErrorSeverity.STOP))
        sys.stderr.write(report.dumps_line({"error": "internal", "module": tb, "message": str(e)}))
        code = 1
    finally:
        if app is not None and args.log is not None:
            app.log.saveLogFile(args.log)
    return code


if __name__ == "__main__":
    sys.exit(main())
