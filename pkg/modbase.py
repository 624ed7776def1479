# -*- coding: utf-8 -*-
"""
Base class for all computation modules

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Exceptions, module events, the event log and the module base class
shared by the model, solver, geometry and estimation modules.

This file is part of EprInfo
"""

import collections
import datetime
import os
import queue
import sys
import threading
import traceback

from lxml import objectify


def GetExceptionTraceBack():
    ''' Get last trace back info as tuple
    @return: tuple(string representation, filename, line number, function)
    '''
    exceptionType, exceptionValue, exceptionTraceback = sys.exc_info()
    if exceptionTraceback is None:
        return tuple(["", "", 0, ""])
    tb = traceback.extract_tb(exceptionTraceback)[-1]
    fn = os.path.split(tb[0])[1]
    txt = f"{fn}, {tb[1]}, {tb[2]}"
    return tuple([txt, fn, tb[1], tb[2]])


class ModuleError(Exception):
    """
    Generic module exception
    """
    kind = "module-error"  #: error record name

    def __init__(self, module, value):
        """ Create the exception object
        @param module: module object name
        @param value: exception description
        """
        super().__init__(str(module) + ': ' + str(value))
        self.module = str(module)
        self.info = str(value)
        self.value = str(module) + ': ' + str(value)

    def __str__(self):
        return self.value

    def record(self):
        """ Error record for the structured error stream
        @return: dictionary
        """
        return {"error": self.kind, "module": self.module, "message": self.info}


class InvalidArgumentError(ModuleError):
    """ Argument outside the accepted range (grid size, step, sample size ...)
    """
    kind = "invalid-argument"


class UnsupportedModelError(ModuleError):
    """ Quantum number outside {-2, -1, +1, +2}
    """
    kind = "unsupported-model"


class DomainError(ModuleError):
    """ Zero probability cell inside a log or ratio form
    """
    kind = "domain"

    def __init__(self, module, value, cell=None):
        super().__init__(module, value)
        self.cell = cell  #: index of the singular cell

    def record(self):
        rec = super().record()
        rec["cell"] = self.cell
        return rec


class BoundaryError(DomainError):
    """ Point on the boundary of the probability simplex
    """
    kind = "boundary"


class SingularBranchError(ModuleError):
    """ Angle estimator evaluated at an endpoint of its principal branch
    """
    kind = "singular-branch"


class EventType:
    """ Module Event Types
    @ivar LOGMESSAGE: show event description on the error stream and log it
    @ivar STATUS: progress or result summary
    @ivar MESSAGE: show event description, don't log it
    @ivar ERROR: an error occured, see info and severity
    @ivar COMMAND: send a command to the module chain
    @ivar LOG: only log the message
    """
    (LOGMESSAGE, STATUS, MESSAGE, ERROR, COMMAND, LOG) = range(6)
    Name = ["LOGMESSAGE", "STATUS", "MESSAGE", "ERROR", "COMMAND", "LOG"]


class ErrorSeverity:
    """ Module event classification in case of ERROR
    @ivar IGNORE: error can be safely ignored
    @ivar NOTIFY: notify user
    @ivar STOP: notify and stop the running command
    """
    (IGNORE, NOTIFY, STOP) = range(3)


class ModuleEvent:
    """ Generic module event
    """

    def __init__(self, module, type, info="", severity=ErrorSeverity.IGNORE, status_field="", cmd_value=0):
        """ Initialize the event
        @param module: module name (string)
        @param type: event type (class EventType)
        @param info: event description (could be a string or numerical value)
        @param severity: event classification in case of ERROR (class ErrorSeverity)
        @param status_field: status field name
        @param cmd_value: any value in case of COMMAND
        """
        self.module = module
        self.type = type
        self.info = info
        self.severity = severity
        self.status_field = status_field
        self.cmd_value = cmd_value
        self.event_time = datetime.datetime.now()

    def __str__(self):
        """ Event string representation
        """
        txt = str(self.module) + ': ' + str(self.info)
        return txt


class EventLog:
    """ Collects module events, newest entries are kept
    """

    def __init__(self, application="EprInfo", version="", maxlen=10000, echo=None):
        ''' Create an empty log
        @param application: application name for the log header
        @param version: application version string
        @param maxlen: maximum number of kept events
        @param echo: optional text stream, ERROR and LOGMESSAGE events are written to it
        '''
        self.application = application
        self.version = version
        self.logFifo = collections.deque(maxlen=maxlen)
        self.moduleinfo = ""
        self.echo = echo

    def __call__(self, event):
        self.updateEventStatus(event)

    def updateEventStatus(self, event):
        """ Put events into the log fifo
        @param event: ModuleEvent object
        """
        if self.echo is not None and event.type in (EventType.ERROR, EventType.LOGMESSAGE):
            self.echo.write(str(event) + "\n")
        if event.type != EventType.MESSAGE:
            self.logFifo.append(event)

    def errors(self, severity=ErrorSeverity.IGNORE):
        """ Get all logged errors with at least the requested severity
        """
        return [e for e in self.logFifo if e.type == EventType.ERROR and e.severity >= severity]

    def getLogText(self):
        """
        Get the log entries as plain text
        """
        txt = u"%s V%s Event Log\n\n" % (self.application, self.version)
        txt += self.moduleinfo
        for event in reversed(self.logFifo):
            txt += u"%s\t %s\n" % (event.event_time.strftime("%Y-%m-%d %H:%M:%S.%f"), str(event))
        return txt

    def saveLogFile(self, file_name):
        ''' Write log entries to file
        @param file_name: full qualified file name
        '''
        with open(file_name, "w", encoding="utf-8") as f:
            f.write(self.getLogText())


def process_parallel(task, count, workers=1):
    ''' Evaluate task(index) for index 0..count-1.
    Every result goes to its own slot, so the output does not depend
    on the order in which the worker threads pick up the indices.
    @param task: callable taking the index
    @param count: number of indices
    @param workers: number of worker threads (1 = run in the calling thread)
    @return: list of results ordered by index
    '''
    results = [None] * count
    if workers <= 1 or count < 2:
        for idx in range(count):
            results[idx] = task(idx)
        return results

    work_queue = queue.Queue()
    for idx in range(count):
        work_queue.put(idx)
    failures = []
    lock = threading.Lock()

    def _worker_thread():
        while True:
            try:
                idx = work_queue.get(False)
            except queue.Empty:
                return
            try:
                results[idx] = task(idx)
            except Exception as e:
                with lock:
                    failures.append(e)
                return

    threads = [threading.Thread(target=_worker_thread) for _ in range(min(workers, count))]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if failures:
        raise failures[0]
    return results


class ModuleBase:
    """ Base class for all computation modules
    """

    def __init__(self, name="ModuleBase", instance=0):
        ''' Create a new module object
        @param name: module object identifier
        @param instance: instance number for this object
        '''
        # set identifier and instance
        self._object_name = name
        self._instance = instance

        # XML parameter version
        self.xmlVersion = 1

        # reset the receiver collection
        self._receivers = []

    def terminate(self):
        ''' Override this method if you need to clean up
        '''
        return

    def setDefault(self):
        ''' Set all module parameters to default values
        Override this method to provide your own default settings
        '''
        return

    def get_module_info(self):
        ''' Get information about this module for the log header
        @return: information string or None if info is not available
        '''
        return None

    def add_receiver(self, receiver):
        ''' Add an event receiver. Don't override this method.
        @param receiver: callable taking a ModuleEvent object
        '''
        self._receivers.append(receiver)

    def remove_receiver(self, receiver):
        ''' Remove an event receiver. Don't override this method.
        @param receiver: callable to remove
        '''
        self._receivers.remove(receiver)

    def send_event(self, event):
        ''' Send ModuleEvent objects to all connected receivers.
        Don't override this method.
        @param event: ModuleEvent object
        '''
        for receiver in self._receivers:
            receiver(event)

    def send_log(self, info):
        ''' Shortcut for LOG events
        @param info: event description
        '''
        self.send_event(ModuleEvent(self._object_name, EventType.LOG, info))

    def send_exception(self, exception, severity=ErrorSeverity.STOP):
        ''' Send Exception as ModuleEvent object to all connected receivers.
        Don't override this method.
        @param exception: Exception() object
        @param severity: error severity
        '''
        tb = GetExceptionTraceBack()[0]
        self.send_event(
            ModuleEvent(self._object_name, EventType.ERROR, tb + " -> " + str(exception), severity=severity))

    def getXML(self):
        ''' Get module properties for XML configuration file. Override this method if you
        want to put module properties into the configuration file.
        @return: objectify XML element::
            <ModuleName instance="n" version="v" module="name">
                ...
            </ModuleName>
        '''
        return None

    def setXML(self, xml):
        ''' Set module properties from XML configuration file. Override this method if you
        want to get module properties from configuration file.
        @param xml: complete objectify XML configuration tree,
        module will search for matching values
        '''
        return

    def _find_configuration(self, xml, tag, module):
        ''' Search the module configuration element and check its version
        @param xml: complete objectify XML configuration tree
        @param tag: element name
        @param module: value of the module attribute
        @return: objectify element or None if not found or not readable
        '''
        cfgs = xml.xpath("//%s[@module='%s' and @instance='%i']" % (tag, module, self._instance))
        if len(cfgs) == 0:
            return None
        cfg = cfgs[0]

        # check version, has to be lower or equal than current version
        version = cfg.get("version")
        if (version is None) or (int(version) > self.xmlVersion):
            self.send_event(ModuleEvent(self._object_name, EventType.ERROR,
                                        "XML Configuration: wrong version",
                                        severity=ErrorSeverity.NOTIFY))
            return None
        return cfg

    @staticmethod
    def _element(tag, *children, **attributes):
        ''' Create an objectify element with string attributes
        '''
        E = objectify.E
        return getattr(E, tag)(*children, **{k: str(v) for k, v in attributes.items()})
