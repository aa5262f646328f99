#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coreview {

using ReviewerId = std::uint32_t;
using ProductId = std::uint32_t;
using ReviewIndex = std::uint32_t;

// Calendar day, stored as days since 1970-01-01.
struct Day {
  std::int32_t days_since_epoch = 0;

  friend auto operator<=>(const Day&, const Day&) = default;
};

std::optional<Day> parse_day(std::string_view text);
std::string format_day(Day day);

enum class ReviewLabel { kFake, kGenuine };
enum class ReviewerLabel { kSpammer, kBenign };

struct ReviewRecord {
  ReviewerId reviewer = 0;
  ProductId product = 0;
  int rating = 0;  // stars, 1..5
  Day date;
  std::optional<ReviewLabel> label;

  friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

enum class InputFormat { kAuto, kFourColumn, kFiveColumn };

struct RejectedLine {
  std::size_t line_number = 0;
  std::string reason;
};

struct ParseReport {
  std::size_t lines_read = 0;
  std::size_t retained = 0;
  std::size_t duplicates = 0;
  std::vector<RejectedLine> rejected;

  // Line-oriented "key<TAB>value" summary followed by one line per rejection.
  void write(std::ostream& out) const;
};

using LabelMap = std::unordered_map<std::string, ReviewerLabel>;

// Immutable review corpus with dense reviewer and product indices.
//
// Dense ids follow byte-wise lexicographic order of the external ids, so
// iterating reviewers in dense-id order is the same as iterating them by id.
// Only the earliest-dated review of each (reviewer, product) pair is retained
// (ties on date keep the first occurrence in the input).
class Dataset {
 public:
  Dataset() = default;

  std::size_t num_reviewers() const { return reviewer_ids_.size(); }
  std::size_t num_products() const { return product_ids_.size(); }
  std::size_t num_reviews() const { return reviews_.size(); }

  std::span<const ReviewRecord> reviews() const { return reviews_; }
  const ReviewRecord& review(ReviewIndex r) const { return reviews_[r]; }

  const std::string& reviewer_name(ReviewerId id) const {
    return reviewer_ids_[id];
  }
  const std::string& product_name(ProductId id) const {
    return product_ids_[id];
  }
  std::optional<ReviewerId> find_reviewer(std::string_view name) const;
  std::optional<ProductId> find_product(std::string_view name) const;

  // Retained reviews of a reviewer, sorted by product id (the set P_i).
  std::span<const ReviewIndex> reviews_by(ReviewerId id) const {
    return by_reviewer_[id];
  }
  // Retained reviews of a product, sorted by reviewer id.
  std::span<const ReviewIndex> reviews_of(ProductId id) const {
    return by_product_[id];
  }

  // Reviewer labels derived from per-review labels or loaded separately.
  // Keys are external reviewer ids.
  const LabelMap& reviewer_labels() const { return reviewer_labels_; }
  void set_reviewer_labels(LabelMap labels) {
    reviewer_labels_ = std::move(labels);
  }
  std::optional<ReviewerLabel> label_of(ReviewerId id) const;

  // Builds a dataset from records that refer to external ids. Used by the
  // parser and by the synthetic generator.
  struct RawReview {
    std::string reviewer;
    std::string product;
    int rating = 0;
    Day date;
    std::optional<ReviewLabel> label;
  };
  static Dataset from_raw(std::span<const RawReview> raw,
                          std::size_t* duplicates = nullptr);

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<ReviewRecord> reviews_;
  std::vector<std::string> reviewer_ids_;
  std::vector<std::string> product_ids_;
  std::unordered_map<std::string, ReviewerId> reviewer_index_;
  std::unordered_map<std::string, ProductId> product_index_;
  std::vector<std::vector<ReviewIndex>> by_reviewer_;
  std::vector<std::vector<ReviewIndex>> by_product_;
  LabelMap reviewer_labels_;
};

struct ParsedDataset {
  Dataset dataset;
  ParseReport report;
};

// Reads tab-separated review metadata. Four columns are
// reviewer, product, rating, date (YYYY-MM-DD). Five columns add a per-review
// label (-1 fake, +1 genuine); both "rating, date, label" and the Yelp
// metadata order "rating, label, date" are accepted. kAuto picks the format
// from the first non-empty line.
//
// Throws IoError if the stream is unreadable and EmptyDatasetError if no line
// survives validation. Bad lines are recorded in the report.
ParsedDataset parse_reviews(std::istream& in,
                            InputFormat format = InputFormat::kAuto);
ParsedDataset parse_reviews_file(const std::string& path,
                                 InputFormat format = InputFormat::kAuto);

struct ParsedLabels {
  LabelMap labels;
  std::vector<RejectedLine> rejected;
};

// Reads "reviewer_id<TAB>label" lines, label in {-1, +1, spammer, benign}.
ParsedLabels load_reviewer_labels(std::istream& in);
ParsedLabels load_reviewer_labels_file(const std::string& path);

// Writes the retained reviews in input order, five columns when every review
// carries a label and four otherwise.
void write_reviews(const Dataset& dataset, std::ostream& out);

}  // namespace coreview
