# Sphinx configuration for dbs-placement.
#
# API pages are regenerated from the sources on every build.

import os
import shutil
import sys

__location__ = os.path.dirname(os.path.abspath(__file__))

sys.path.insert(0, os.path.join(__location__, "../src"))

output_dir = os.path.join(__location__, "api")
module_dir = os.path.join(__location__, "../src/dbs_placement")

shutil.rmtree(output_dir, ignore_errors=True)

try:
    from sphinx.ext import apidoc

    apidoc.main(["-f", "-o", output_dir, module_dir])
except Exception as e:
    print(f"Running `sphinx-apidoc` failed!\n{e}")

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "dbs-placement"
copyright = "2024, Oleg Korsak"

try:
    from dbs_placement import __version__ as version
except ImportError:
    version = ""

if not version or version.lower() == "unknown":
    version = os.getenv("READTHEDOCS_VERSION", "unknown")

release = version

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store", ".venv"]
pygments_style = "sphinx"
html_theme = "alabaster"
html_static_path = []
htmlhelp_basename = "dbs_placement-doc"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "pydantic": ("https://docs.pydantic.dev/latest", None),
    "msgspec": ("https://jcristharif.com/msgspec", None),
}
