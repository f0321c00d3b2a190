#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hte/dataset.hpp"
#include "hte/errors.hpp"
#include "hte/tariff.hpp"

namespace hte {

struct MeterReading {
  MinuteStamp minute = 0;
  double kwh = 0.0;
};

// Half-hourly readings of one household. Timestamps must be strictly
// increasing on the half-hour grid; gaps stay gaps.
class LoadPanel {
 public:
  LoadPanel(std::string household_id, std::vector<MeterReading> readings)
      : household_id_(std::move(household_id)), readings_(std::move(readings)) {
    for (std::size_t i = 0; i < readings_.size(); ++i) {
      const auto& r = readings_[i];
      if (!on_halfhour_grid(r.minute)) {
        throw validation_error("panel " + household_id_ + ": reading off the half-hour grid at " +
                               format_timestamp(r.minute));
      }
      if (!(r.kwh >= 0.0) || !std::isfinite(r.kwh)) {
        throw validation_error("panel " + household_id_ + ": kwh must be finite and >= 0 at " +
                               format_timestamp(r.minute));
      }
      if (i > 0 && readings_[i - 1].minute >= r.minute) {
        throw validation_error("panel " + household_id_ +
                               ": timestamps must be strictly increasing at " +
                               format_timestamp(r.minute));
      }
    }
  }

  const std::string& household_id() const { return household_id_; }
  const std::vector<MeterReading>& readings() const { return readings_; }

 private:
  std::string household_id_;
  std::vector<MeterReading> readings_;
};

// Inclusive calendar-day range.
struct DateRange {
  DayNumber begin_day = 0;
  DayNumber end_day = 0;

  bool contains(DayNumber day) const { return day >= begin_day && day <= end_day; }
};

// Mean consumption over Peak-classified half-hours inside the range. Peak
// hours exist only on non-holiday weekdays, so weekends are excluded by
// construction.
inline double peak_outcome(const LoadPanel& panel, const DateRange& range,
                           const HolidayCalendar& holidays, const TariffSchedule& schedule) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : panel.readings()) {
    if (!range.contains(day_of(r.minute))) continue;
    if (classify_halfhour(r.minute, holidays, schedule) == TariffWindow::Peak) {
      sum += r.kwh;
      ++count;
    }
  }
  if (count == 0) {
    throw degeneracy_error("peak_outcome: no peak half-hours for household " +
                           panel.household_id() + " in range");
  }
  return sum / static_cast<double>(count);
}

struct FeatureRow {
  std::string household_id;
  std::vector<double> values;  // aligned with usage_feature_names()
};

namespace detail {

struct Accumulator {
  std::size_t n = 0;
  double sum = 0.0;
  double sum2 = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum2 += x * x;
  }

  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }

  // Sample variance; 0 for fewer than two values.
  double variance() const {
    if (n < 2) return 0.0;
    return std::max(0.0, (sum2 - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1));
  }
};

inline const std::array<const char*, 6>& month_keys() {
  static const std::array<const char*, 6> keys{"jul", "aug", "sep", "oct", "nov", "dec"};
  return keys;
}

}  // namespace detail

inline const std::vector<std::string>& usage_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out{
        "mean_usage", "min_usage", "max_usage", "var_usage",
        "mean_peak_usage", "mean_nonpeak_usage", "var_peak_usage", "var_nonpeak_usage",
        "mean_night_usage", "mean_daytime_usage", "var_night_usage", "var_daytime_usage",
        "mean_usage_weekdays", "var_usage_weekdays",
        "mean_peak_usage_weekdays", "var_peak_usage_weekdays",
        "mean_nonpeak_usage_weekdays", "var_nonpeak_usage_weekdays",
        "mean_night_usage_weekdays", "var_night_usage_weekdays",
        "mean_daytime_usage_weekdays", "var_daytime_usage_weekdays",
        "mean_usage_weekends", "var_usage_weekends",
        "mean_night_usage_weekends", "var_night_usage_weekends",
        "mean_daytime_usage_weekends", "var_daytime_usage_weekends",
        "mean_daily_max_usage", "mean_daily_min_usage",
        "mean_halfhour_cov",
        "ratio_night_daily", "ratio_lunchtime_daily"};
    for (const char* m : detail::month_keys()) {
      out.push_back(std::string("mean_usage_") + m);
      out.push_back(std::string("var_usage_") + m);
    }
    for (const char* m : detail::month_keys()) {
      out.push_back(std::string("mean_peak_usage_") + m);
      out.push_back(std::string("var_peak_usage_") + m);
    }
    for (int slot = 0; slot < kSlotsPerDay; ++slot) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "mean_usage_hh_%02d%02d", slot / 2, (slot % 2) * 30);
      out.emplace_back(buf);
    }
    return out;
  }();
  return names;
}

// Continuous usage covariates over the benchmark range. Conventions: peak,
// night, and daytime follow the tariff window classification; weekday and
// weekend split by calendar day only; lunchtime is 12:00-14:00; monthly
// features are keyed July-December; empty groups and zero-mean half-hour
// slots yield 0.
inline FeatureRow extract_features(const LoadPanel& panel, const DateRange& range,
                                   const HolidayCalendar& holidays,
                                   const TariffSchedule& schedule) {
  using detail::Accumulator;

  Accumulator all, peak, nonpeak, night, daytime;
  Accumulator wd_all, wd_peak, wd_nonpeak, wd_night, wd_daytime;
  Accumulator we_all, we_night, we_daytime;
  std::array<Accumulator, 12> monthly{};
  std::array<Accumulator, 12> monthly_peak{};
  std::array<Accumulator, kSlotsPerDay> slots{};
  std::map<DayNumber, std::pair<double, double>> daily_minmax;  // day -> (min, max)
  Accumulator lunchtime;
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  std::size_t distinct_days = 0;
  DayNumber last_day = std::numeric_limits<DayNumber>::min();

  for (const auto& r : panel.readings()) {
    const DayNumber day = day_of(r.minute);
    if (!range.contains(day)) continue;
    if (day != last_day) {
      ++distinct_days;
      last_day = day;
    }

    const TariffWindow w = classify_halfhour(r.minute, holidays, schedule);
    const bool weekend = is_weekend(day);
    const int slot = slot_of(r.minute);
    const int month = month_of(day);

    all.add(r.kwh);
    min_v = std::min(min_v, r.kwh);
    max_v = std::max(max_v, r.kwh);
    (w == TariffWindow::Peak ? peak : nonpeak).add(r.kwh);
    if (w == TariffWindow::Night) night.add(r.kwh);
    if (w == TariffWindow::Day) daytime.add(r.kwh);

    if (!weekend) {
      wd_all.add(r.kwh);
      (w == TariffWindow::Peak ? wd_peak : wd_nonpeak).add(r.kwh);
      if (w == TariffWindow::Night) wd_night.add(r.kwh);
      if (w == TariffWindow::Day) wd_daytime.add(r.kwh);
    } else {
      we_all.add(r.kwh);
      if (w == TariffWindow::Night) we_night.add(r.kwh);
      if (w == TariffWindow::Day) we_daytime.add(r.kwh);
    }

    monthly[static_cast<std::size_t>(month - 1)].add(r.kwh);
    if (w == TariffWindow::Peak) monthly_peak[static_cast<std::size_t>(month - 1)].add(r.kwh);
    slots[static_cast<std::size_t>(slot)].add(r.kwh);
    if (slot >= 24 && slot < 28) lunchtime.add(r.kwh);

    auto [it, inserted] = daily_minmax.try_emplace(day, r.kwh, r.kwh);
    if (!inserted) {
      it->second.first = std::min(it->second.first, r.kwh);
      it->second.second = std::max(it->second.second, r.kwh);
    }
  }

  if (distinct_days < 7) {
    throw validation_error("extract_features: panel " + panel.household_id() +
                           " covers fewer than 7 days in range");
  }

  Accumulator daily_max, daily_min;
  for (const auto& [day, mm] : daily_minmax) {
    daily_min.add(mm.first);
    daily_max.add(mm.second);
  }

  double cov_sum = 0.0;
  for (const auto& acc : slots) {
    const double m = acc.mean();
    cov_sum += m > 0.0 ? std::sqrt(acc.variance()) / m : 0.0;
  }

  FeatureRow row;
  row.household_id = panel.household_id();
  auto& v = row.values;
  v.reserve(usage_feature_names().size());

  v.push_back(all.mean());
  v.push_back(min_v);
  v.push_back(max_v);
  v.push_back(all.variance());
  v.push_back(peak.mean());
  v.push_back(nonpeak.mean());
  v.push_back(peak.variance());
  v.push_back(nonpeak.variance());
  v.push_back(night.mean());
  v.push_back(daytime.mean());
  v.push_back(night.variance());
  v.push_back(daytime.variance());
  v.push_back(wd_all.mean());
  v.push_back(wd_all.variance());
  v.push_back(wd_peak.mean());
  v.push_back(wd_peak.variance());
  v.push_back(wd_nonpeak.mean());
  v.push_back(wd_nonpeak.variance());
  v.push_back(wd_night.mean());
  v.push_back(wd_night.variance());
  v.push_back(wd_daytime.mean());
  v.push_back(wd_daytime.variance());
  v.push_back(we_all.mean());
  v.push_back(we_all.variance());
  v.push_back(we_night.mean());
  v.push_back(we_night.variance());
  v.push_back(we_daytime.mean());
  v.push_back(we_daytime.variance());
  v.push_back(daily_max.mean());
  v.push_back(daily_min.mean());
  v.push_back(cov_sum / kSlotsPerDay);
  v.push_back(all.mean() > 0.0 ? night.mean() / all.mean() : 0.0);
  v.push_back(all.mean() > 0.0 ? lunchtime.mean() / all.mean() : 0.0);
  for (int m = 7; m <= 12; ++m) {
    v.push_back(monthly[static_cast<std::size_t>(m - 1)].mean());
    v.push_back(monthly[static_cast<std::size_t>(m - 1)].variance());
  }
  for (int m = 7; m <= 12; ++m) {
    v.push_back(monthly_peak[static_cast<std::size_t>(m - 1)].mean());
    v.push_back(monthly_peak[static_cast<std::size_t>(m - 1)].variance());
  }
  for (const auto& acc : slots) v.push_back(acc.mean());

  return row;
}

struct SurveyRow {
  std::string household_id;
  std::vector<std::string> cells;  // aligned with the survey schema
};

struct AssembledData {
  Dataset data;
  std::vector<std::string> household_ids;  // row order (sorted by id)
};

namespace detail {

inline void require_matching_ids(const std::vector<std::string>& expected,
                                 std::vector<std::string> actual, const char* source) {
  std::sort(actual.begin(), actual.end());
  for (std::size_t i = 1; i < actual.size(); ++i) {
    if (actual[i] == actual[i - 1]) {
      throw validation_error(std::string("assemble_dataset: duplicate household id \"") +
                             actual[i] + "\" in " + source);
    }
  }
  if (actual != expected) {
    std::string missing;
    std::string extra;
    for (const auto& id : expected) {
      if (!std::binary_search(actual.begin(), actual.end(), id)) missing += " " + id;
    }
    for (const auto& id : actual) {
      if (!std::binary_search(expected.begin(), expected.end(), id)) extra += " " + id;
    }
    throw validation_error(std::string("assemble_dataset: household ids in ") + source +
                           " do not align; missing:[" + missing + " ] unexpected:[" + extra + " ]");
  }
}

}  // namespace detail

// Joins survey categoricals, usage features, outcome, and treatment by
// household id. Every source must carry exactly the same id set; rows are
// ordered by id so assembly is independent of input order.
inline AssembledData assemble_dataset(const std::vector<FeatureRow>& features,
                                      const std::vector<SurveyRow>& survey,
                                      const CovariateSchema& survey_schema,
                                      const std::map<std::string, double>& outcomes,
                                      const std::map<std::string, std::uint8_t>& treatments) {
  if (features.empty()) throw validation_error("assemble_dataset: no households");

  std::vector<std::string> ids;
  ids.reserve(features.size());
  for (const auto& f : features) ids.push_back(f.household_id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) {
      throw validation_error("assemble_dataset: duplicate household id \"" + ids[i] +
                             "\" in features");
    }
  }

  std::vector<std::string> survey_ids;
  survey_ids.reserve(survey.size());
  for (const auto& s : survey) survey_ids.push_back(s.household_id);
  detail::require_matching_ids(ids, survey_ids, "survey");
  std::vector<std::string> outcome_ids;
  outcome_ids.reserve(outcomes.size());
  for (const auto& [id, value] : outcomes) outcome_ids.push_back(id);
  detail::require_matching_ids(ids, outcome_ids, "outcomes");
  std::vector<std::string> treatment_ids;
  treatment_ids.reserve(treatments.size());
  for (const auto& [id, value] : treatments) treatment_ids.push_back(id);
  detail::require_matching_ids(ids, treatment_ids, "treatments");

  std::map<std::string, const FeatureRow*> feature_by_id;
  for (const auto& f : features) feature_by_id[f.household_id] = &f;
  std::map<std::string, const SurveyRow*> survey_by_id;
  for (const auto& s : survey) survey_by_id[s.household_id] = &s;

  std::vector<Variable> vars = survey_schema.vars();
  for (const auto& name : usage_feature_names()) {
    vars.push_back(Variable{name, VarKind::Continuous, {}});
  }
  CovariateSchema full_schema(std::move(vars));

  const std::size_t n = ids.size();
  const std::size_t num_survey = survey_schema.size();
  const std::size_t num_usage = usage_feature_names().size();

  std::vector<RawColumn> columns;
  columns.reserve(num_survey + num_usage);
  for (std::size_t v = 0; v < num_survey; ++v) {
    if (survey_schema.var(v).kind == VarKind::Continuous) {
      columns.emplace_back(std::vector<double>(n));
    } else {
      columns.emplace_back(std::vector<int>(n));
    }
  }
  for (std::size_t f = 0; f < num_usage; ++f) columns.emplace_back(std::vector<double>(n));

  std::vector<double> y(n);
  std::vector<std::uint8_t> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = ids[i];
    const SurveyRow& srow = *survey_by_id.at(id);
    if (srow.cells.size() != num_survey) {
      throw validation_error("assemble_dataset: survey row for \"" + id + "\" has " +
                             std::to_string(srow.cells.size()) + " cells, expected " +
                             std::to_string(num_survey));
    }
    for (std::size_t v = 0; v < num_survey; ++v) {
      const auto& var = survey_schema.var(v);
      if (var.kind == VarKind::Continuous) {
        std::get<std::vector<double>>(columns[v])[i] =
            parse_double(srow.cells[v], "survey \"" + id + "\", column \"" + var.name + "\"");
      } else {
        const int l = survey_schema.level_index(v, srow.cells[v]);
        if (l < 0) {
          throw validation_error("assemble_dataset: unknown level \"" + srow.cells[v] +
                                 "\" for \"" + var.name + "\" (household " + id + ")");
        }
        std::get<std::vector<int>>(columns[v])[i] = l;
      }
    }
    const FeatureRow& frow = *feature_by_id.at(id);
    if (frow.values.size() != num_usage) {
      throw validation_error("assemble_dataset: feature row width mismatch for \"" + id + "\"");
    }
    for (std::size_t f = 0; f < num_usage; ++f) {
      std::get<std::vector<double>>(columns[num_survey + f])[i] = frow.values[f];
    }
    y[i] = outcomes.at(id);
    const std::uint8_t t = treatments.at(id);
    if (t > 1) throw validation_error("assemble_dataset: treatment must be 0 or 1 for \"" + id + "\"");
    d[i] = t;
  }

  return AssembledData{Dataset(std::move(full_schema), std::move(columns), std::move(y), std::move(d)),
                       std::move(ids)};
}

}  // namespace hte
