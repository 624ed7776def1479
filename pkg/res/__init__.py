# -*- coding: utf-8 -*-
"""
Packaged resources: default configuration
"""
