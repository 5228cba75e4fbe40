#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chatmeta {

enum class Errc {
  unparsable_line,
  empty_export,
  missing_message_file,
  malformed_entry,
  parse_error,
  missing_donation_date,
  empty_sample,
  side_missing,
  singular_design,
  too_few_groups,
  non_convergence,
  negative_gap,
  empty_series,
  no_qualifying_months,
  empty_corpus,
  infeasible_target,
  invalid_config,
  missing_stage_input,
  io_error,
};

std::string_view errc_name(Errc c);

// All data-level failures surface as Error; callers that can recover
// (skip-and-report paths) never throw, they count instead.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace chatmeta
