# -*- coding: utf-8 -*-
"""
Report Writers

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

JSON and CSV serialization of command reports. Every floating point
value is written with 17 significant digits, so a parsed report holds
the same doubles as the computation.

This file is part of EprInfo
"""

import csv
import io
import json
import math

import numpy as np


def format_float(value):
    ''' 17 significant digits, always recognizable as a float.
    Infinite and NaN values have no JSON number, they become null.
    '''
    value = float(value)
    if not math.isfinite(value):
        return "null"
    txt = "%.17g" % value
    if not any(c in txt for c in ".en"):
        txt += ".0"
    return txt


def _encode(value, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ["%s%s: %s" % (pad, json.dumps(str(k)), _encode(v, indent, level + 1)) for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError("cannot serialize %s" % type(value).__name__)


def dumps(record, indent=2):
    ''' Serialize a report record (dict, list, numbers, strings) as JSON text
    '''
    return _encode(record, indent, 0) + "\n"


def dumps_line(record):
    ''' Single line JSON, used for the error records
    '''
    return _encode(record, 0, 0).replace("\n", "") + "\n"


def dumps_csv(rows):
    ''' Header row plus one line per row dictionary, floats with 17 digits
    @param rows: list of flat dictionaries sharing the keys of the first row
    '''
    out = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(out, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        cells = []
        for key in header:
            value = row.get(key)
            if isinstance(value, (bool, np.bool_)):
                cells.append("true" if value else "false")
            elif isinstance(value, (float, np.floating)):
                cells.append(format_float(value) if math.isfinite(value) else "")
            elif value is None:
                cells.append("")
            else:
                cells.append(value)
        writer.writerow(cells)
    return out.getvalue()
