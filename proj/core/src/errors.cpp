#include "devharness/errors.hpp"

namespace devharness {

const char* errc_name(errc code) {
  switch (code) {
    case errc::no_requirements_section: return "NoRequirementsSection";
    case errc::empty_document: return "EmptyDocument";
    case errc::provider_error: return "ProviderError";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::malformed_response: return "MalformedResponse";
    case errc::script_exhausted: return "ScriptExhausted";
    case errc::unknown_tool: return "UnknownTool";
    case errc::submit_denied: return "SubmitDenied";
    case errc::sandbox_lost: return "SandboxLost";
    case errc::build_failed: return "BuildFailed";
    case errc::image_unavailable: return "ImageUnavailable";
    case errc::mask_unenforceable: return "MaskUnenforceable";
    case errc::gateway_error: return "GatewayError";
    case errc::phase_aborted: return "PhaseAborted";
    case errc::missing_artifact: return "MissingArtifact";
    case errc::malformed_judge_output: return "MalformedJudgeOutput";
    case errc::malformed_draft: return "MalformedDraft";
    case errc::insufficient_candidates: return "InsufficientCandidates";
    case errc::migration_aborted: return "MigrationAborted";
    case errc::harness_crash: return "HarnessCrash";
    case errc::no_tests: return "NoTests";
    case errc::zero_base: return "ZeroBase";
    case errc::uneven_votes: return "UnevenVotes";
    case errc::wrong_arity: return "WrongArity";
    case errc::zero_variance: return "ZeroVariance";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::malformed_label: return "MalformedLabel";
    case errc::run_not_found: return "RunNotFound";
    case errc::corrupt_run: return "CorruptRun";
    case errc::unevaluated_run: return "UnevaluatedRun";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace devharness
