# -*- coding: utf-8 -*-
"""
Numerical Tools

EprInfo EPR-Bohm Information Toolkit

------------------------------------------------------------

Periodic quadrature, central finite differences and the fixed step
Runge-Kutta integrator used by the model, solver and geometry modules.

This file is part of EprInfo
"""

import numpy as np
from scipy import integrate

from modbase import InvalidArgumentError

TWO_PI = 2.0 * np.pi

# default finite difference step
FD_STEP = 1e-4
# largest accepted finite difference step
FD_STEP_MAX = 1e-3


def check_grid(grid_points, minimum, module, even=True):
    ''' Validate a quadrature grid size
    @param grid_points: number of grid points
    @param minimum: smallest accepted size
    @param module: module name for the error message
    @param even: grid size must be even
    '''
    if int(grid_points) != grid_points or grid_points < minimum or (even and grid_points % 2):
        rule = "an even number >= %d" % minimum if even else ">= %d" % minimum
        raise InvalidArgumentError(module, "grid_points must be %s, got %s" % (rule, grid_points))
    return int(grid_points)


def check_step(h, module):
    ''' Validate a finite difference step, h in (0, 1e-3]
    '''
    if not (0.0 < h <= FD_STEP_MAX):
        raise InvalidArgumentError(module, "finite difference step must be in (0, %g], got %s" % (FD_STEP_MAX, h))
    return float(h)


def periodic_grid(grid_points):
    ''' Uniform grid over [0, 2pi), endpoint excluded
    '''
    return np.arange(grid_points) * (TWO_PI / grid_points)


def periodic_trapezoid(values):
    ''' Composite trapezoid rule over one period [0, 2pi].
    The value at 2pi is the value at 0, so the closing sample is appended.
    @param values: integrand on periodic_grid()
    @return: integral
    '''
    values = np.asarray(values, dtype=float)
    closed = np.append(values, values[..., :1], axis=-1)
    return integrate.trapezoid(closed, dx=TWO_PI / values.shape[-1], axis=-1)


def closed_romberg(f, lo, hi, grid_points):
    ''' Romberg quadrature on the closed interval [lo, hi] for non periodic integrands
    @param f: vectorized integrand
    @param grid_points: requested resolution, rounded up to 2**k (at least 1024)
    '''
    k = int(np.ceil(np.log2(max(grid_points, 1024))))
    x = np.linspace(lo, hi, 2 ** k + 1)
    return integrate.romb(f(x), dx=x[1] - x[0])


def derivative(f, x, h=FD_STEP, richardson=False):
    ''' First derivative by central differences
    @param f: vectorized function
    @param x: evaluation point(s)
    @param h: step
    @param richardson: combine steps h and h/2 to cancel the h**2 term
    '''
    d = (f(x + h) - f(x - h)) / (2.0 * h)
    if richardson:
        hh = 0.5 * h
        d2 = (f(x + hh) - f(x - hh)) / (2.0 * hh)
        d = (4.0 * d2 - d) / 3.0
    return d


def second_derivative(f, x, h=FD_STEP, richardson=False):
    ''' Second derivative by central differences
    @param f: vectorized function
    @param x: evaluation point(s)
    @param h: step
    @param richardson: combine steps h and h/2 to cancel the h**2 term
    '''
    fx = f(x)
    d = (f(x + h) - 2.0 * fx + f(x - h)) / (h * h)
    if richardson:
        hh = 0.5 * h
        d2 = (f(x + hh) - 2.0 * fx + f(x - hh)) / (hh * hh)
        d = (4.0 * d2 - d) / 3.0
    return d


def rk4(rhs, y0, t0, t1, points):
    ''' Classic fixed step 4th order Runge-Kutta
    @param rhs: right hand side rhs(t, y) -> dy/dt (numpy array)
    @param y0: initial state
    @param t0: start of the interval
    @param t1: end of the interval
    @param points: number of grid points including both ends
    @return: (grid, states) with states of shape (points, len(y0))
    '''
    grid = np.linspace(t0, t1, points)
    step = (t1 - t0) / (points - 1)
    states = np.empty((points, len(y0)))
    y = np.array(y0, dtype=float)
    states[0] = y
    for i in range(points - 1):
        t = grid[i]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * step, y + 0.5 * step * k1)
        k3 = rhs(t + 0.5 * step, y + 0.5 * step * k2)
        k4 = rhs(t + step, y + step * k3)
        y = y + step * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        states[i + 1] = y
    return grid, states
