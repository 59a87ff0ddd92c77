"""remixd: search, remix, and fabricate repository models.

The core pipeline: fetch printable models from a repository (or offline
fixtures), place them in a scene next to imported environment scans, remix
them with boolean operations and transforms, simplify, and export STL and
G-code. A FastAPI service exposes the pipeline to the browser editor and
to the CLI.
"""

__version__ = "0.1.0"
