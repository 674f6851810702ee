#pragma once

#include "fbgec/seq2seq/model.hpp"

namespace fbgec {

// Versioned binary checkpoint: config, vocabulary fingerprint, parameters.
// Parameter bytes round-trip exactly, so a reloaded model reproduces
// log probabilities bit for bit.
void save_checkpoint(const CorrectionModel& model, const std::string& path);

// The supplied vocabulary must match the stored fingerprint.
CorrectionModel load_checkpoint(const std::string& path,
                                std::shared_ptr<const Vocabulary> vocab);

}  // namespace fbgec
