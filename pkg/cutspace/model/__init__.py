from .network import BayesNet, Evidence, network_from_dict, parse_network
from .modules import ModuleSet, Partition, form_module_set, make_partition
from .modgraph import DirectedModuleGraph, build_undirected, enumerate_orientations, orient
from .decisions import Decision, DecisionSet, enumerate_decision_sets, enumerate_decisions
from .posterior import CutPosterior, TildeMode, build_posterior, enumerate_posteriors, enumerate_space
from .render import render
