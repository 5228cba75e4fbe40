#include "chatmeta/error.hpp"

namespace chatmeta {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::unparsable_line: return "UnparsableLine";
    case Errc::empty_export: return "EmptyExport";
    case Errc::missing_message_file: return "MissingMessageFile";
    case Errc::malformed_entry: return "MalformedEntry";
    case Errc::parse_error: return "ParseError";
    case Errc::missing_donation_date: return "MissingDonationDate";
    case Errc::empty_sample: return "EmptySample";
    case Errc::side_missing: return "SideMissing";
    case Errc::singular_design: return "SingularDesign";
    case Errc::too_few_groups: return "TooFewGroups";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::negative_gap: return "NegativeGap";
    case Errc::empty_series: return "EmptySeries";
    case Errc::no_qualifying_months: return "NoQualifyingMonths";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::infeasible_target: return "InfeasibleTarget";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::missing_stage_input: return "MissingStageInput";
    case Errc::io_error: return "IoError";
  }
  return "Error";
}

} // namespace chatmeta
