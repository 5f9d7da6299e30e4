#pragma once

// Deliberately naive reference implementations used as test oracles. They work
// on plain string rows and share no code with the library's analysis paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

struct Row {
  std::string user;
  std::string item;
  std::int64_t ts = 0;
  std::uint64_t ord = 0;

  bool operator==(const Row&) const = default;
};

inline bool row_before(const Row& a, const Row& b) {
  if (a.ts != b.ts) return a.ts < b.ts;
  return a.ord < b.ord;
}

// user -> that user's rows in (ts, ord) order
inline std::map<std::string, std::vector<Row>> by_user(const std::vector<Row>& rows) {
  std::map<std::string, std::vector<Row>> out;
  for (const auto& r : rows) out[r.user].push_back(r);
  for (auto& [u, seq] : out) {
    // insertion sort, O(n^2) on purpose
    for (std::size_t i = 1; i < seq.size(); ++i) {
      for (std::size_t j = i; j > 0 && row_before(seq[j], seq[j - 1]); --j) std::swap(seq[j], seq[j - 1]);
    }
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0 : s / static_cast<double>(v.size());
}

struct NaiveCore {
  std::uint64_t users = 0, items = 0, interactions = 0;
  double avg_len = 0, density_pct = 0;
  std::vector<double> popularity, seq_len;
};

inline NaiveCore core(const std::vector<Row>& rows) {
  NaiveCore c;
  std::map<std::string, double> per_user, per_item;
  for (const auto& r : rows) {
    per_user[r.user] += 1;
    per_item[r.item] += 1;
  }
  c.users = per_user.size();
  c.items = per_item.size();
  c.interactions = rows.size();
  c.avg_len = static_cast<double>(c.interactions) / static_cast<double>(c.users);
  c.density_pct = 100.0 * static_cast<double>(c.interactions) / static_cast<double>(c.users * c.items);
  for (auto& [k, v] : per_item) c.popularity.push_back(v);
  for (auto& [k, v] : per_user) c.seq_len.push_back(v);
  return c;
}

struct NaiveTemporal {
  std::int64_t start = 0, end = 0;
  std::uint64_t colliding = 0;
  double collision_pct = 0;
  std::vector<double> deltas, user_lifetimes, item_lifetimes;
};

inline NaiveTemporal temporal(const std::vector<Row>& rows) {
  NaiveTemporal t;
  t.start = rows[0].ts;
  t.end = rows[0].ts;
  for (const auto& r : rows) {
    t.start = std::min(t.start, r.ts);
    t.end = std::max(t.end, r.ts);
  }
  // O(n^2) pairwise collision scan
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i != j && rows[i].user == rows[j].user && rows[i].ts == rows[j].ts) {
        ++t.colliding;
        break;
      }
    }
  }
  t.collision_pct = 100.0 * static_cast<double>(t.colliding) / static_cast<double>(rows.size());
  for (const auto& [u, seq] : by_user(rows)) {
    for (std::size_t i = 1; i < seq.size(); ++i) t.deltas.push_back(static_cast<double>(seq[i].ts - seq[i - 1].ts));
    std::int64_t lo = seq[0].ts, hi = seq[0].ts;
    for (const auto& r : seq) {
      lo = std::min(lo, r.ts);
      hi = std::max(hi, r.ts);
    }
    t.user_lifetimes.push_back(static_cast<double>(hi - lo));
  }
  std::set<std::string> items;
  for (const auto& r : rows) items.insert(r.item);
  for (const auto& it : items) {
    std::optional<std::int64_t> lo, hi;
    for (const auto& r : rows) {
      if (r.item != it) continue;
      if (!lo || r.ts < *lo) lo = r.ts;
      if (!hi || r.ts > *hi) hi = r.ts;
    }
    t.item_lifetimes.push_back(static_cast<double>(*hi - *lo));
  }
  return t;
}

struct NaiveRepeats {
  std::uint64_t repeated = 0, consecutive = 0;
  double repeated_pct = 0, consecutive_pct = 0;
  std::vector<double> per_user_share_pct;
};

inline NaiveRepeats repeats(const std::vector<Row>& rows) {
  NaiveRepeats r;
  for (const auto& [u, seq] : by_user(rows)) {
    std::uint64_t mine = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      bool earlier = false;
      for (std::size_t j = 0; j < i; ++j) earlier = earlier || seq[j].item == seq[i].item;
      mine += earlier;
      if (i > 0 && seq[i - 1].item == seq[i].item) ++r.consecutive;
    }
    r.repeated += mine;
    r.per_user_share_pct.push_back(100.0 * static_cast<double>(mine) / static_cast<double>(seq.size()));
  }
  r.repeated_pct = 100.0 * static_cast<double>(r.repeated) / static_cast<double>(rows.size());
  r.consecutive_pct = 100.0 * static_cast<double>(r.consecutive) / static_cast<double>(rows.size());
  return r;
}

// Civil date from days since epoch (H. Hinnant's algorithm).
inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += (m <= 2);
}

inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// granularity: 0 hour, 1 day, 2 week (Monday), 3 month
inline std::int64_t bucket_of(std::int64_t ts, int granularity) {
  const std::int64_t day_ms = 86'400'000;
  std::int64_t days = ts / day_ms;
  if (ts < 0 && ts % day_ms != 0) --days;
  switch (granularity) {
    case 0: {
      std::int64_t h = ts / 3'600'000;
      if (ts < 0 && ts % 3'600'000 != 0) --h;
      return h * 3'600'000;
    }
    case 1: return days * day_ms;
    case 2: {
      // weekday: 0 = Monday; 1970-01-01 was Thursday (3)
      std::int64_t wd = ((days % 7) + 7 + 3) % 7;
      return (days - wd) * day_ms;
    }
    default: {
      std::int64_t y;
      unsigned m, d;
      civil_from_days(days, y, m, d);
      return days_from_civil(y, m, 1) * day_ms;
    }
  }
}

inline std::map<std::int64_t, std::uint64_t> timeline(const std::vector<Row>& rows, int granularity,
                                                      std::int64_t lo, std::int64_t hi,
                                                      std::uint64_t& excluded) {
  std::map<std::int64_t, std::uint64_t> out;
  excluded = 0;
  for (const auto& r : rows) {
    if (r.ts < lo || r.ts > hi) {
      ++excluded;
      continue;
    }
    ++out[bucket_of(r.ts, granularity)];
  }
  return out;
}

struct NaiveLeakage {
  std::uint64_t shared = 0, leaked = 0, item_leaked = 0;
  double leaked_pct = 0, item_leaked_pct = 0, overlap_pct = 0;
};

inline NaiveLeakage leakage(const std::vector<Row>& train, const std::vector<Row>& target) {
  NaiveLeakage l;
  if (target.empty()) return l;
  std::optional<std::int64_t> tmax, tmin;
  for (const auto& r : train) {
    if (!tmax || r.ts > *tmax) tmax = r.ts;
    if (!tmin || r.ts < *tmin) tmin = r.ts;
  }
  std::int64_t emin = target[0].ts, emax = target[0].ts;
  for (const auto& t : target) {
    emin = std::min(emin, t.ts);
    emax = std::max(emax, t.ts);
    bool shared = false, item_later = false;
    for (const auto& r : train) {
      shared = shared || (r.user == t.user && r.item == t.item && r.ts == t.ts);
      item_later = item_later || (r.item == t.item && r.ts > t.ts);
    }
    l.shared += shared;
    l.item_leaked += item_later;
    l.leaked += (tmax && t.ts < *tmax);
  }
  l.leaked_pct = 100.0 * static_cast<double>(l.leaked) / static_cast<double>(target.size());
  l.item_leaked_pct = 100.0 * static_cast<double>(l.item_leaked) / static_cast<double>(target.size());
  if (tmax) {
    if (emin == emax) {
      l.overlap_pct = (emin >= *tmin && emin <= *tmax) ? 100.0 : 0.0;
    } else {
      // count-free interval intersection
      const double lo = static_cast<double>(std::max(*tmin, emin));
      const double hi = static_cast<double>(std::min(*tmax, emax));
      l.overlap_pct = hi > lo ? 100.0 * (hi - lo) / static_cast<double>(emax - emin) : 0.0;
    }
  }
  return l;
}

struct NaiveCold {
  std::uint64_t eval_users = 0, cold_users = 0, target_items = 0, cold_items = 0, cold_interactions = 0;
};

inline NaiveCold cold(const std::vector<Row>& train, const std::vector<Row>& target) {
  NaiveCold c;
  std::set<std::string> tu, ti, eu, ei;
  for (const auto& r : train) {
    tu.insert(r.user);
    ti.insert(r.item);
  }
  for (const auto& r : target) {
    eu.insert(r.user);
    ei.insert(r.item);
    c.cold_interactions += !ti.count(r.item);
  }
  c.eval_users = eu.size();
  c.target_items = ei.size();
  for (const auto& u : eu) c.cold_users += !tu.count(u);
  for (const auto& i : ei) c.cold_items += !ti.count(i);
  return c;
}

// sup over the merged support of |F_a - F_b|, each ECDF evaluated by a full scan.
inline double ks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> points = a;
  points.insert(points.end(), b.begin(), b.end());
  double d = 0;
  for (double x : points) {
    double fa = 0, fb = 0;
    for (double v : a) fa += v <= x;
    for (double v : b) fb += v <= x;
    d = std::max(d, std::fabs(fa / static_cast<double>(a.size()) - fb / static_cast<double>(b.size())));
  }
  return d;
}

struct NaiveShift {
  std::vector<double> target_gaps, reference_gaps, target_positions, reference_positions;
};

// Samples behind the shift diagnostics, by explicit per-user merging.
inline NaiveShift shift(const std::vector<Row>& input, const std::vector<Row>& target,
                        const std::vector<Row>& reference) {
  NaiveShift s;
  const auto in = by_user(input);
  for (const auto& [u, tg] : by_user(target)) {
    std::vector<Row> hist;
    if (auto it = in.find(u); it != in.end()) hist = it->second;
    std::vector<Row> all = hist;
    all.insert(all.end(), tg.begin(), tg.end());
    all = by_user(all).begin()->second;
    for (const auto& t : tg) {
      if (!hist.empty()) s.target_gaps.push_back(static_cast<double>(t.ts - hist.back().ts));
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (all[k] == t) s.target_positions.push_back(static_cast<double>(k + 1) / static_cast<double>(all.size()));
      }
    }
  }
  for (const auto& [u, seq] : by_user(reference)) {
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (k > 0) s.reference_gaps.push_back(static_cast<double>(seq[k].ts - seq[k - 1].ts));
      s.reference_positions.push_back(static_cast<double>(k + 1) / static_cast<double>(seq.size()));
    }
  }
  return s;
}

// Type-7 quantile via a fresh sort.
inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1) * p;
  const double lo = std::floor(h);
  const double hi = std::ceil(h);
  return v[static_cast<std::size_t>(lo)] + (h - lo) * (v[static_cast<std::size_t>(hi)] - v[static_cast<std::size_t>(lo)]);
}

struct GenOptions {
  int max_users = 50;
  int max_items = 20;
  int max_rows = 500;
};

// Random rows with forced timestamp collisions and repeats: timestamps come from
// a small pool per user and items from a small alphabet.
inline std::vector<Row> random_rows(std::mt19937_64& rng, const GenOptions& opt = {}) {
  auto uni = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n_users = uni(1, opt.max_users);
  const int n_items = uni(1, opt.max_items);
  const int n_rows = uni(1, opt.max_rows);
  const std::int64_t base = 1'600'000'000'000LL + uni(0, 1000) * 86'400'000LL;
  std::vector<Row> rows;
  rows.reserve(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    Row r;
    r.user = "u" + std::to_string(uni(0, n_users - 1));
    r.item = "i" + std::to_string(uni(0, n_items - 1));
    // coarse pool forces collisions; occasional spread covers many buckets
    if (uni(0, 3) == 0) {
      r.ts = base + static_cast<std::int64_t>(uni(0, 20)) * 3'600'000LL;
    } else {
      r.ts = base + static_cast<std::int64_t>(uni(0, 400)) * 1'234'567LL;
    }
    if (!rows.empty() && uni(0, 4) == 0) {
      // repeat the previous row's item and timestamp for the same user
      r.user = rows.back().user;
      r.item = rows.back().item;
      if (uni(0, 1) == 0) r.ts = rows.back().ts;
    }
    r.ord = static_cast<std::uint64_t>(i);
    rows.push_back(std::move(r));
  }
  return rows;
}


// Iterate-until-stable n-core on raw rows; prunes users and items in the same pass.
inline std::vector<Row> n_core(std::vector<Row> rows, std::uint32_t n) {
  for (;;) {
    std::map<std::string, std::uint32_t> uc, ic;
    for (const auto& r : rows) {
      ++uc[r.user];
      ++ic[r.item];
    }
    std::vector<Row> kept;
    for (const auto& r : rows) {
      if (uc[r.user] >= n && ic[r.item] >= n) kept.push_back(r);
    }
    if (kept.size() == rows.size()) return kept;
    rows = std::move(kept);
  }
}

inline std::vector<Row> flatten(const std::map<std::string, std::vector<Row>>& groups) {
  std::vector<Row> out;
  for (const auto& [u, seq] : groups) out.insert(out.end(), seq.begin(), seq.end());
  return out;
}

inline std::vector<Row> dedup(const std::vector<Row>& rows) {
  std::vector<Row> out;
  for (const auto& [u, seq] : by_user(rows)) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i == 0 || seq[i].item != seq[i - 1].item) out.push_back(seq[i]);
    }
  }
  return out;
}

struct NaiveSplit {
  std::vector<Row> train, val_input, val_target, test_input, test_target;
};

// Global temporal split with cut fractions given in whole percent, so the cut
// index is exact integer arithmetic: ceil(pct * N / 100).
inline NaiveSplit gts(const std::vector<Row>& rows, int val_pct, int test_pct, bool all_items,
                      bool filter_cold) {
  std::vector<Row> sorted = rows;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    for (std::size_t j = i; j > 0 && row_before(sorted[j], sorted[j - 1]); --j) std::swap(sorted[j], sorted[j - 1]);
  }
  const std::size_t n = sorted.size();
  const std::size_t kv = (static_cast<std::size_t>(val_pct) * n + 99) / 100;
  const std::size_t kt = (static_cast<std::size_t>(test_pct) * n + 99) / 100;
  std::map<std::uint64_t, int> period;
  for (std::size_t i = 0; i < n; ++i) period[sorted[i].ord] = i < kv ? 0 : (i < kt ? 1 : 2);

  NaiveSplit s;
  std::set<std::string> warm;
  for (std::size_t i = 0; i < kv; ++i) {
    s.train.push_back(sorted[i]);
    warm.insert(sorted[i].item);
  }
  auto eval = [&](int p, std::vector<Row>& input, std::vector<Row>& target) {
    for (const auto& [u, seq] : by_user(rows)) {
      std::vector<Row> in, tg;
      if (all_items) {
        for (const auto& r : seq) {
          if (period[r.ord] < p) in.push_back(r);
          if (period[r.ord] == p) tg.push_back(r);
        }
      } else {
        std::optional<std::size_t> last;
        for (std::size_t i = 0; i < seq.size(); ++i) {
          if (period[seq[i].ord] == p) last = i;
        }
        if (last) {
          for (std::size_t i = 0; i < *last; ++i) in.push_back(seq[i]);
          tg.push_back(seq[*last]);
        }
      }
      if (filter_cold) {
        std::vector<Row> kept;
        for (const auto& r : tg) {
          if (warm.count(r.item)) kept.push_back(r);
        }
        tg = kept;
      }
      if (tg.empty()) continue;
      input.insert(input.end(), in.begin(), in.end());
      target.insert(target.end(), tg.begin(), tg.end());
    }
  };
  eval(1, s.val_input, s.val_target);
  eval(2, s.test_input, s.test_target);
  return s;
}

inline NaiveSplit loo(const std::vector<Row>& rows, std::size_t min_len, bool filter_cold) {
  NaiveSplit s;
  const auto groups = by_user(rows);
  std::set<std::string> warm;
  for (const auto& [u, seq] : groups) {
    const std::size_t keep = seq.size() >= min_len ? seq.size() - 2 : seq.size();
    for (std::size_t i = 0; i < keep; ++i) {
      s.train.push_back(seq[i]);
      warm.insert(seq[i].item);
    }
  }
  for (const auto& [u, seq] : groups) {
    if (seq.size() < min_len) continue;
    const std::size_t n = seq.size();
    if (!filter_cold || warm.count(seq[n - 1].item)) {
      for (std::size_t i = 0; i + 1 < n; ++i) s.test_input.push_back(seq[i]);
      s.test_target.push_back(seq[n - 1]);
    }
    if (!filter_cold || warm.count(seq[n - 2].item)) {
      for (std::size_t i = 0; i + 2 < n; ++i) s.val_input.push_back(seq[i]);
      s.val_target.push_back(seq[n - 2]);
    }
  }
  return s;
}

// Rows in (user, ts, ord) order, for comparing against library logs.
inline std::vector<Row> canonical(const std::vector<Row>& rows) { return flatten(by_user(rows)); }

inline std::string to_csv(const std::vector<Row>& rows) {
  std::ostringstream out;
  out << "user_id,item_id,timestamp\n";
  for (const auto& r : rows) out << r.user << ',' << r.item << ',' << r.ts << '\n';
  return out.str();
}

}  // namespace oracle
