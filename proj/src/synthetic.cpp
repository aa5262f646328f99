#include "coreview/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "coreview/error.hpp"

namespace coreview {
namespace {

constexpr int kSpanDays = 3 * 365;

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, i);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (background_reviewers < 1 || background_products < 1 ||
      reviews_per_reviewer < 1 || campaigns < 1 || campaign_size < 1 ||
      targets_per_campaign < 1) {
    throw ConfigError("synthetic spec: all counts must be at least 1");
  }
  if (reviews_per_reviewer > background_products ||
      targets_per_campaign > background_products) {
    throw ConfigError("synthetic spec: more products requested than exist");
  }
  if (window_days < 0 || window_days > kSpanDays) {
    throw ConfigError("synthetic spec: window must lie in [0, 1095] days");
  }
  if (campaign_rating < 1 || campaign_rating > 5) {
    throw ConfigError("synthetic spec: campaign rating must be 1..5");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const int origin = parse_day("2012-01-01")->days_since_epoch;
  std::uniform_int_distribution<int> day_dist(0, kSpanDays - 1);
  std::uniform_int_distribution<int> star_dist(1, 5);

  std::vector<std::string> products(spec.background_products);
  for (std::size_t p = 0; p < products.size(); ++p) {
    products[p] = numbered("p", p);
  }
  std::vector<std::size_t> pool(products.size());
  std::iota(pool.begin(), pool.end(), 0);

  // Partial Fisher-Yates: the first `count` entries of pool become a uniform
  // sample without replacement.
  auto sample = [&](std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    return std::vector<std::size_t>(pool.begin(), pool.begin() + count);
  };

  SyntheticData data;
  for (std::size_t r = 0; r < spec.background_reviewers; ++r) {
    const std::string id = numbered("u", r);
    for (std::size_t p : sample(spec.reviews_per_reviewer)) {
      data.reviews.push_back(
          {id, products[p], star_dist(rng), Day{origin + day_dist(rng)}, {}});
    }
    data.labels[id] = ReviewerLabel::kBenign;
  }

  std::uniform_int_distribution<int> start_dist(0, kSpanDays - 1 - spec.window_days);
  std::uniform_int_distribution<int> offset_dist(0, spec.window_days);
  for (std::size_t c = 0; c < spec.campaigns; ++c) {
    const auto targets = sample(spec.targets_per_campaign);
    const int start = origin + start_dist(rng);
    for (std::size_t m = 0; m < spec.campaign_size; ++m) {
      const std::string id = numbered(
          "u", spec.background_reviewers + c * spec.campaign_size + m);
      for (std::size_t p : targets) {
        data.reviews.push_back({id, products[p], spec.campaign_rating,
                                Day{start + offset_dist(rng)}, {}});
      }
      data.labels[id] = ReviewerLabel::kSpammer;
    }
  }
  return data;
}

void write_synthetic(const SyntheticData& data, std::ostream& reviews,
                     std::ostream& labels) {
  for (const auto& r : data.reviews) {
    reviews << r.reviewer << '\t' << r.product << '\t' << r.rating << '\t'
            << format_day(r.date) << '\n';
  }
  const std::map<std::string, ReviewerLabel> sorted(data.labels.begin(),
                                                    data.labels.end());
  for (const auto& [id, label] : sorted) {
    labels << id << '\t' << (label == ReviewerLabel::kSpammer ? "-1" : "+1")
           << '\n';
  }
}

}  // namespace coreview
