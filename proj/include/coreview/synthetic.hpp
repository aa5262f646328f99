#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "coreview/review_data.hpp"

namespace coreview {

// Uniform background traffic with injected review-spam campaigns. Every
// campaign member reviews every campaign target inside the campaign window
// with the campaign rating.
struct SyntheticSpec {
  std::size_t background_reviewers = 1000;
  std::size_t background_products = 200;
  std::size_t reviews_per_reviewer = 5;
  std::size_t campaigns = 3;
  std::size_t campaign_size = 10;
  std::size_t targets_per_campaign = 5;
  int window_days = 3;
  int campaign_rating = 5;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticData {
  std::vector<Dataset::RawReview> reviews;
  LabelMap labels;  // campaign members spammer, everyone else benign
};

// Background dates span three years from 2012-01-01. Campaign members are
// numbered after the background reviewers, so they never win id tie-breaks.
// Deterministic for a fixed seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Four-column review file and "reviewer<TAB>-1|+1" label file (sorted).
void write_synthetic(const SyntheticData& data, std::ostream& reviews,
                     std::ostream& labels);

}  // namespace coreview
