"""
Core logic: formulas, agent logic, semantics, decision procedure, translations and proofs
"""
from .errors import (CielError, DerivationFormatError, EmptyGroupError, FormulaSyntaxError,
                     IllFormedFixpointError, MissingAgentAtomError, ModelValidationError, ReservedNameError,
                     ResourceLimitError, TranslationError, UnknownWorldError, UnsatisfiableTheoryError)
from .formula import closure, nneg, parse_agent, parse_world, to_text
from .agentlogic import AgentModel, AgentTheory, FilteredAgentModel, filtered_model, load_theory
from .semantics import CielModel, GelModel, check, check_gfp, extension, validate
from .translate import ciel_to_gel, gel_to_ciel, parse_gel
from .mucalc import check_via_mu, mu_eval, translate_t
from .decide import DecisionLimits, SatResult, gel_sat, sat, valid
from .proofs import Derivation, check_derivation, gen_ind_n, load_derivation
from .scenarios import PuzzleSpec, check_round_inference
