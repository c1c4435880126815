from .checks import (CheckReport, StructureError, check_channel_equiv, check_equiv_on_inputs,
                     check_output_declarations, check_unitary_equiv)
from .derivation import DerivationError, DerivationReport, run_derivation, verify_bbc
from .identities import IDENTITIES, verify_identity
from .rules import RULES, RuleError, Site, apply_rule, certify, emit_trailing
