# Configuration file for the Sphinx documentation builder.
#
# For the full list of options see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import sys
from datetime import datetime
from importlib import metadata

sys.path.append("../..")


# -- Project information -----------------------------------------------------

project = "doptrack"
author = "doptrack developers"
copyright = f"{datetime.today().year}, {author}"

try:
    release = metadata.version(project)
except metadata.PackageNotFoundError:
    release = "0.1.0"


# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
]

templates_path = ["_templates"]

language = "pt_BR"

exclude_patterns = []

autodoc_member_order = "bysource"


# -- Options for HTML output -------------------------------------------------

html_theme = "alabaster"

html_theme_options = {
    "fixed_sidebar": "true",
    "font_family": "'Roboto', Georgia, sans",
    "head_font_family": "'Garamond', Georgia, serif",
}

html_static_path = ["_static"]

# Read the Docs expects an explicit master document.
master_doc = "index"

pygments_style = "sphinx"
