/*
 * Copyright 2026 The actif Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIF_DATA_LOOCV_HPP_
#define ACTIF_DATA_LOOCV_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "actif/data/dataset.hpp"
#include "actif/error.hpp"

namespace actif::data {

struct Fold {
  std::string subject;  // held-out subject
  SequenceDataset train;
  SequenceDataset test;
};

// One fold per subject, ordered by subject id.
inline std::vector<Fold> loocv_splits(const SequenceDataset& ds) {
  std::vector<std::string> subjects = ds.subjects();
  if (subjects.size() < 2) {
    throw DataError("leave-one-subject-out needs at least 2 subjects, found " +
                    std::to_string(subjects.size()));
  }
  std::sort(subjects.begin(), subjects.end());
  std::vector<Fold> folds;
  folds.reserve(subjects.size());
  for (const auto& held_out : subjects) {
    Fold fold;
    fold.subject = held_out;
    fold.train = ds.filtered([&](const Sample& s) { return s.subject != held_out; });
    fold.test = ds.filtered([&](const Sample& s) { return s.subject == held_out; });
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace actif::data

#endif  // ACTIF_DATA_LOOCV_HPP_
