# -*- coding: utf-8 -*-
"""
Counter Based Random Streams

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Bit exact definition of the draws used by the estimation module:

  generator  Philox-4x64 with 10 rounds (numpy.random.Philox)
  key        two 64-bit words (seed, stream), counter starts at 0
  raw draw   successive 64-bit outputs of random_raw()
  uniform    u = (raw >> 11) * 2**-53, u in [0, 1)
  category   first j with u < cdf[j]; cdf accumulated in the order
             ++, --, +-, -+ and the last entry forced to 1.0

Stream 0 belongs to a single sample, replication i uses stream i + 1.

This file is part of EprInfo
"""

import numpy as np

from modbase import InvalidArgumentError

RNG_NAME = "philox4x64-10"
SEED_MAX = 2 ** 64 - 1

_UNIFORM_SCALE = 2.0 ** -53


def check_seed(seed, module="RNG"):
    ''' Seed must be an unsigned 64-bit integer
    '''
    if int(seed) != seed or not (0 <= seed <= SEED_MAX):
        raise InvalidArgumentError(module, "seed must be an integer in [0, 2**64), got %s" % seed)
    return int(seed)


def bit_generator(seed, stream=0):
    ''' Create the counter based generator for (seed, stream)
    '''
    key = np.array([check_seed(seed), check_seed(stream)], dtype=np.uint64)
    return np.random.Philox(key=key)


def uniforms(seed, stream, size):
    ''' Uniform doubles in [0, 1) with 53 random bits each
    '''
    raw = bit_generator(seed, stream).random_raw(size)
    return (raw >> np.uint64(11)).astype(np.float64) * _UNIFORM_SCALE


def categorical_counts(p, size, seed, stream=0):
    ''' Draw size independent categories and count them
    @param p: category probabilities
    @param size: number of draws
    @return: integer counts per category
    '''
    cdf = np.cumsum(np.asarray(p, dtype=float))
    cdf[-1] = 1.0
    cells = np.searchsorted(cdf, uniforms(seed, stream, size), side="right")
    return np.bincount(cells, minlength=len(cdf)).astype(np.int64)
