#include "coreview/review_data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "coreview/error.hpp"

namespace coreview {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

// Accepts "4" and the integral float form "4.0" used by some dumps.
std::optional<int> parse_rating(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  if (value != static_cast<int>(value)) return std::nullopt;
  const int stars = static_cast<int>(value);
  if (stars < 1 || stars > 5) return std::nullopt;
  return stars;
}

std::optional<ReviewLabel> parse_review_label(std::string_view text) {
  if (text == "-1") return ReviewLabel::kFake;
  if (text == "1" || text == "+1") return ReviewLabel::kGenuine;
  return std::nullopt;
}

}  // namespace

std::optional<Day> parse_day(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int value = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc() || ptr != first + len) return std::nullopt;
    return value;
  };
  const auto y = field(0, 4);
  const auto m = field(5, 2);
  const auto d = field(8, 2);
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{
      std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
      std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Day{static_cast<std::int32_t>(
      std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

std::string format_day(Day day) {
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{day.days_since_epoch}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

void ParseReport::write(std::ostream& out) const {
  out << "lines_read\t" << lines_read << '\n'
      << "retained\t" << retained << '\n'
      << "rejected\t" << rejected.size() << '\n'
      << "deduplicated\t" << duplicates << '\n';
  for (const auto& r : rejected) {
    out << "reject\t" << r.line_number << '\t' << r.reason << '\n';
  }
}

std::optional<ReviewerId> Dataset::find_reviewer(std::string_view name) const {
  auto it = reviewer_index_.find(std::string(name));
  if (it == reviewer_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ProductId> Dataset::find_product(std::string_view name) const {
  auto it = product_index_.find(std::string(name));
  if (it == product_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ReviewerLabel> Dataset::label_of(ReviewerId id) const {
  auto it = reviewer_labels_.find(reviewer_ids_[id]);
  if (it == reviewer_labels_.end()) return std::nullopt;
  return it->second;
}

Dataset Dataset::from_raw(std::span<const RawReview> raw,
                          std::size_t* duplicates) {
  Dataset ds;

  // Dense ids in lexicographic order of the external ids.
  std::vector<std::string> reviewers, products;
  reviewers.reserve(raw.size());
  products.reserve(raw.size());
  for (const auto& r : raw) {
    reviewers.push_back(r.reviewer);
    products.push_back(r.product);
  }
  auto unique_sorted = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(reviewers);
  unique_sorted(products);
  ds.reviewer_ids_ = std::move(reviewers);
  ds.product_ids_ = std::move(products);
  for (std::size_t i = 0; i < ds.reviewer_ids_.size(); ++i) {
    ds.reviewer_index_.emplace(ds.reviewer_ids_[i], static_cast<ReviewerId>(i));
  }
  for (std::size_t i = 0; i < ds.product_ids_.size(); ++i) {
    ds.product_index_.emplace(ds.product_ids_[i], static_cast<ProductId>(i));
  }

  // Earliest review per (reviewer, product) wins; ties keep input order.
  std::unordered_map<std::uint64_t, std::size_t> keep;
  keep.reserve(raw.size());
  std::size_t dup_count = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto u = ds.reviewer_index_.at(raw[i].reviewer);
    const auto p = ds.product_index_.at(raw[i].product);
    const std::uint64_t key = (std::uint64_t{u} << 32) | p;
    auto [it, inserted] = keep.emplace(key, i);
    if (!inserted) {
      ++dup_count;
      if (raw[i].date < raw[it->second].date) it->second = i;
    }
  }
  std::vector<std::size_t> retained;
  retained.reserve(keep.size());
  for (const auto& [key, idx] : keep) retained.push_back(idx);
  std::sort(retained.begin(), retained.end());

  ds.reviews_.reserve(retained.size());
  for (std::size_t idx : retained) {
    const auto& r = raw[idx];
    ds.reviews_.push_back(ReviewRecord{ds.reviewer_index_.at(r.reviewer),
                                       ds.product_index_.at(r.product),
                                       r.rating, r.date, r.label});
  }

  ds.by_reviewer_.assign(ds.reviewer_ids_.size(), {});
  ds.by_product_.assign(ds.product_ids_.size(), {});
  for (std::size_t i = 0; i < ds.reviews_.size(); ++i) {
    ds.by_reviewer_[ds.reviews_[i].reviewer].push_back(
        static_cast<ReviewIndex>(i));
    ds.by_product_[ds.reviews_[i].product].push_back(
        static_cast<ReviewIndex>(i));
  }
  for (auto& list : ds.by_reviewer_) {
    std::sort(list.begin(), list.end(), [&](ReviewIndex a, ReviewIndex b) {
      return ds.reviews_[a].product < ds.reviews_[b].product;
    });
  }
  for (auto& list : ds.by_product_) {
    std::sort(list.begin(), list.end(), [&](ReviewIndex a, ReviewIndex b) {
      return ds.reviews_[a].reviewer < ds.reviews_[b].reviewer;
    });
  }

  // Reviewer is a spammer iff any raw review (duplicates included) is fake.
  for (const auto& r : raw) {
    if (!r.label) continue;
    const auto label = *r.label == ReviewLabel::kFake ? ReviewerLabel::kSpammer
                                                      : ReviewerLabel::kBenign;
    auto [it, inserted] = ds.reviewer_labels_.emplace(r.reviewer, label);
    if (!inserted && label == ReviewerLabel::kSpammer) it->second = label;
  }

  if (duplicates) *duplicates = dup_count;
  return ds;
}

ParsedDataset parse_reviews(std::istream& in, InputFormat format) {
  if (!in) throw IoError("review input stream is not readable");

  std::vector<Dataset::RawReview> raw;
  ParseReport report;
  std::string line;
  std::size_t line_number = 0;
  InputFormat resolved = format;

  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (is_blank(text)) continue;
    ++report.lines_read;

    const auto fields = split_tabs(text);
    if (resolved == InputFormat::kAuto) {
      resolved = fields.size() >= 5 ? InputFormat::kFiveColumn
                                    : InputFormat::kFourColumn;
    }
    const std::size_t expected =
        resolved == InputFormat::kFiveColumn ? 5 : 4;
    auto reject = [&](std::string reason) {
      report.rejected.push_back({line_number, std::move(reason)});
    };
    if (fields.size() != expected) {
      reject("expected " + std::to_string(expected) + " columns, got " +
             std::to_string(fields.size()));
      continue;
    }
    if (fields[0].empty() || fields[1].empty()) {
      reject("empty reviewer or product id");
      continue;
    }
    const auto rating = parse_rating(fields[2]);
    if (!rating) {
      reject("rating outside 1..5: '" + std::string(fields[2]) + "'");
      continue;
    }

    std::optional<Day> date;
    std::optional<ReviewLabel> label;
    if (expected == 4) {
      date = parse_day(fields[3]);
    } else if (auto d = parse_day(fields[3])) {
      date = d;
      label = parse_review_label(fields[4]);
      if (!label) {
        reject("unknown review label: '" + std::string(fields[4]) + "'");
        continue;
      }
    } else {
      label = parse_review_label(fields[3]);
      date = parse_day(fields[4]);
      if (!label && date) {
        reject("unknown review label: '" + std::string(fields[3]) + "'");
        continue;
      }
    }
    if (!date) {
      reject("unparseable date");
      continue;
    }
    raw.push_back({std::string(fields[0]), std::string(fields[1]), *rating,
                   *date, label});
  }
  if (in.bad()) throw IoError("read error on review input");
  if (raw.empty()) throw EmptyDatasetError("no valid review lines in input");

  ParsedDataset out;
  out.dataset = Dataset::from_raw(raw, &report.duplicates);
  report.retained = out.dataset.num_reviews();
  out.report = std::move(report);
  return out;
}

ParsedDataset parse_reviews_file(const std::string& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open review file: " + path);
  return parse_reviews(in, format);
}

ParsedLabels load_reviewer_labels(std::istream& in) {
  if (!in) throw IoError("label input stream is not readable");
  ParsedLabels out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = strip_cr(line);
    if (is_blank(text)) continue;
    const auto fields = split_tabs(text);
    if (fields.size() != 2 || fields[0].empty()) {
      out.rejected.push_back({line_number, "expected reviewer<TAB>label"});
      continue;
    }
    const std::string_view token = fields[1];
    ReviewerLabel label;
    if (token == "-1" || token == "spammer") {
      label = ReviewerLabel::kSpammer;
    } else if (token == "+1" || token == "1" || token == "benign") {
      label = ReviewerLabel::kBenign;
    } else {
      out.rejected.push_back(
          {line_number, "unknown label token: '" + std::string(token) + "'"});
      continue;
    }
    out.labels[std::string(fields[0])] = label;
  }
  if (in.bad()) throw IoError("read error on label input");
  return out;
}

ParsedLabels load_reviewer_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file: " + path);
  return load_reviewer_labels(in);
}

void write_reviews(const Dataset& dataset, std::ostream& out) {
  const auto reviews = dataset.reviews();
  const bool labeled = !reviews.empty() &&
                       std::all_of(reviews.begin(), reviews.end(),
                                   [](const auto& r) { return r.label; });
  for (const auto& r : reviews) {
    out << dataset.reviewer_name(r.reviewer) << '\t'
        << dataset.product_name(r.product) << '\t' << r.rating << '\t'
        << format_day(r.date);
    if (labeled) out << '\t' << (*r.label == ReviewLabel::kFake ? "-1" : "+1");
    out << '\n';
  }
}

}  // namespace coreview
