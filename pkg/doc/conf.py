#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# htmm documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

from __future__ import absolute_import, division, print_function, unicode_literals

extensions = [
    'sphinx.ext.todo',
    'sphinx.ext.ifconfig',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'contents'

project = 'htmm: hidden tree Markov models'
copyright = '2026, the htmm developers. Source code is GPLv3.'
author = 'the htmm developers'

version = '0.3.0+git'
release = version

language = 'en'
today_fmt = '%B %d, %Y'
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = True

html_theme = 'haiku'
html_title = "htmm: hidden tree Markov models"
html_static_path = []
html_domain_indices = False
htmlhelp_basename = 'htmmdoc'

latex_elements = {
    'papersize': 'a4paper',
}
latex_documents = [
    (master_doc, 'htmm.tex', 'htmm Documentation', author, 'manual'),
]

man_pages = [
    ('manpage', 'htmm', 'hidden tree Markov models', [author], 1)
]
