#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "juice/experiment.hpp"

namespace juice {

// JSON-lines trial records. One object per line:
//   {"sweep_value":..,"snr_db":..,"trial":..,"noise_variance":..,
//    "support":[..],"phi":M,"x":M,"y":M}
// where each matrix M is {"rows":r,"cols":c,"data":[re,im,re,im,...]} in
// row-major order.
std::string trial_record_to_json(const TrialRecord& record);
TrialRecord trial_record_from_json(const std::string& line);

void write_trial_records(std::ostream& os, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trial_records(std::istream& is);

}  // namespace juice
