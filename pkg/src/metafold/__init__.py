"""Typed metagraphs with a constructor algebra, recursion schemes over it,
a metapath topology and a process model.  See ``metafold.cli`` for the
command-line front end."""
from importlib import resources as _resources

from .errors import *  # noqa: F401,F403
from .core import (DTMG, TMG, Connection, Edge, Target, TargetRef, TypeRegistry, empty_dtmg,
                   empty_tmg, lateral_dtmg, make_dtmg, target_roles, validate)
from .construct import (CRF, Beside, ConnectC, EdgeC, EmptyC, SwapPrim, beside, connect,
                        crf_count, decompose, edge_c, enumerate_crfs, evaluate, to_prefix)
from .morph import (ALGEBRAS, FTMG, DtmgAlgebra, DtmgCoalgebra, ana, cata, chrono, futu, histo,
                    hylo, metamorph, numtargets, shortestpathlength, shortestpathlist)
from .topology import (OpenSet, all_opens, heyting_implies, interior, is_open, join, meet,
                       pseudo_complement, topology)
from .process import Trace, TraversalEvent, pruned, traversal_to_dtmg
from .canon import canonical_form, equivalent, isomorphic
from .mgf import MgfDocument, load, parse, serialize
from .dot import to_dot
from . import kernels

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled example document, e.g. ``data_path("fig1.mgf")``."""
    return _resources.files(__name__) / "data" / name
