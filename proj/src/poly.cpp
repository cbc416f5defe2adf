#include "polyising/poly.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "polyising/error.hpp"
#include "polyising/text.hpp"

namespace polyising {

PolySpec::PolySpec(std::size_t n_vars, std::vector<Term> terms) : n_vars_(n_vars) {
  for (auto& t : terms) {
    if (!std::isfinite(t.coeff)) throw Error("non-finite coefficient");
    std::sort(t.vars.begin(), t.vars.end());
    if (std::adjacent_find(t.vars.begin(), t.vars.end()) != t.vars.end())
      throw Error("repeated variable within a term");
    if (!t.vars.empty() && t.vars.back() >= n_vars)
      throw Error("variable index " + std::to_string(t.vars.back() + 1) + " exceeds n_vars " +
                  std::to_string(n_vars));
  }
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.vars < b.vars; });

  for (std::size_t i = 0; i < terms.size();) {
    double c = terms[i].coeff;
    std::size_t j = i + 1;
    for (; j < terms.size() && terms[j].vars == terms[i].vars; ++j) c += terms[j].coeff;
    if (!std::isfinite(c)) throw Error("coefficient overflow while merging");
    if (c != 0.0) {
      vars_.insert(vars_.end(), terms[i].vars.begin(), terms[i].vars.end());
      offsets_.push_back(static_cast<std::uint32_t>(vars_.size()));
      coeffs_.push_back(c);
      degree_ = std::max(degree_, terms[i].vars.size());
    }
    i = j;
  }

  std::vector<std::uint32_t> counts(n_vars_ + 1, 0);
  for (Var v : vars_) ++counts[v + 1];
  incidence_offsets_.assign(n_vars_ + 1, 0);
  for (std::size_t v = 0; v < n_vars_; ++v)
    incidence_offsets_[v + 1] = incidence_offsets_[v] + counts[v + 1];
  incidence_.resize(vars_.size());
  std::vector<std::uint32_t> cursor(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    for (std::uint32_t p = offsets_[k]; p < offsets_[k + 1]; ++p)
      incidence_[cursor[vars_[p]]++] = static_cast<std::uint32_t>(k);
}

double PolySpec::constant() const noexcept {
  return (!coeffs_.empty() && offsets_[1] == 0) ? coeffs_[0] : 0.0;
}

double PolySpec::abs_coeff_sum() const noexcept {
  double sum = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    if (offsets_[k + 1] > offsets_[k]) sum += std::abs(coeffs_[k]);
  return sum;
}

std::vector<Term> PolySpec::terms() const {
  std::vector<Term> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) {
    const auto t = (*this)[k];
    out.push_back({std::vector<Var>(t.vars.begin(), t.vars.end()), t.coeff});
  }
  return out;
}

namespace {

void check_point(const PolySpec& poly, std::size_t n) {
  if (n != poly.n_vars())
    throw Error("dimension mismatch: point has " + std::to_string(n) + " entries, polynomial has " +
                std::to_string(poly.n_vars()) + " variables");
}

}  // namespace

double evaluate(const PolySpec& poly, std::span<const double> point) {
  check_point(poly, point.size());
  for (double v : point)
    if (!std::isfinite(v)) throw Error("non-finite entry in evaluation point");
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto t = poly[k];
    double prod = t.coeff;
    for (Var v : t.vars) prod *= point[v];
    sum += prod;
  }
  return sum;
}

double evaluate(const PolySpec& poly, std::span<const Spin> spins) {
  check_point(poly, spins.size());
  for (Spin s : spins)
    if (s != 1 && s != -1) throw Error("spin entries must be -1 or +1");
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto t = poly[k];
    int sign = 1;
    for (Var v : t.vars) sign *= spins[v];
    sum += sign > 0 ? t.coeff : -t.coeff;
  }
  return sum;
}

void gradient_unchecked(const PolySpec& poly, const double* x, double* out) noexcept {
  std::fill(out, out + poly.n_vars(), 0.0);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto t = poly[k];
    const double c = t.coeff;
    const Var* v = t.vars.data();
    switch (t.vars.size()) {
      case 0:
        break;
      case 1:
        out[v[0]] += c;
        break;
      case 2:
        out[v[0]] += c * x[v[1]];
        out[v[1]] += c * x[v[0]];
        break;
      case 3: {
        const double a = x[v[0]], b = x[v[1]], d = x[v[2]];
        out[v[0]] += c * b * d;
        out[v[1]] += c * a * d;
        out[v[2]] += c * a * b;
        break;
      }
      default: {
        // out[v[i]] += c * prefix(i) * suffix(i+1); suffix built on the fly.
        const std::size_t d = t.vars.size();
        double prefix = c;
        double stack_buf[16];
        std::vector<double> heap_buf;
        double* pre = stack_buf;
        if (d > 16) {
          heap_buf.resize(d);
          pre = heap_buf.data();
        }
        for (std::size_t i = 0; i < d; ++i) {
          pre[i] = prefix;
          prefix *= x[v[i]];
        }
        double suffix = 1.0;
        for (std::size_t i = d; i-- > 0;) {
          out[v[i]] += pre[i] * suffix;
          suffix *= x[v[i]];
        }
        break;
      }
    }
  }
}

void gradient(const PolySpec& poly, std::span<const double> x, std::span<double> out) {
  check_point(poly, x.size());
  check_point(poly, out.size());
  for (double v : x)
    if (!std::isfinite(v)) throw Error("non-finite entry in gradient point");
  gradient_unchecked(poly, x.data(), out.data());
}

std::vector<double> gradient(const PolySpec& poly, std::span<const double> x) {
  std::vector<double> out(poly.n_vars());
  gradient(poly, x, out);
  return out;
}

PolySpec expand_table(std::span<const double> values, std::size_t n_vars,
                      const ExpandOptions& options) {
  if (n_vars > options.max_vars || n_vars > 62)
    throw Error("expansion over " + std::to_string(n_vars) + " variables exceeds limit " +
                std::to_string(options.max_vars));
  const std::size_t states = std::size_t{1} << n_vars;
  if (values.size() != states)
    throw Error("value table must have 2^n entries");
  std::vector<double> w(values.begin(), values.end());
  for (std::size_t len = 1; len < states; len <<= 1)
    for (std::size_t base = 0; base < states; base += 2 * len)
      for (std::size_t j = base; j < base + len; ++j) {
        const double a = w[j], b = w[j + len];
        w[j] = a + b;
        w[j + len] = a - b;
      }
  const double scale = std::ldexp(1.0, -static_cast<int>(n_vars));
  std::vector<Term> terms;
  for (std::size_t mask = 0; mask < states; ++mask) {
    const double c = w[mask] * scale;
    if (std::abs(c) < options.drop_tol || c == 0.0) continue;
    Term t{{}, c};
    for (std::size_t i = 0; i < n_vars; ++i)
      if (mask >> i & 1U) t.vars.push_back(static_cast<Var>(i));
    terms.push_back(std::move(t));
  }
  return PolySpec(n_vars, std::move(terms));
}

PolySpec multilinear_expand(const std::function<double(std::span<const Spin>)>& f,
                            std::size_t n_vars, const ExpandOptions& options) {
  if (n_vars > options.max_vars || n_vars > 62)
    throw Error("expansion over " + std::to_string(n_vars) + " variables exceeds limit " +
                std::to_string(options.max_vars));
  const std::size_t states = std::size_t{1} << n_vars;
  std::vector<double> table(states);
  for (std::size_t mask = 0; mask < states; ++mask) {
    const auto s = spins_from_mask(mask, n_vars);
    table[mask] = f(s);
  }
  return expand_table(table, n_vars, options);
}

SpinVector spins_from_mask(std::uint64_t mask, std::size_t n_vars) {
  SpinVector s(n_vars);
  for (std::size_t i = 0; i < n_vars; ++i) s[i] = (mask >> i & 1U) ? Spin{-1} : Spin{1};
  return s;
}

ExhaustiveResult exhaustive_minimum(const PolySpec& poly, std::size_t max_vars) {
  const std::size_t n = poly.n_vars();
  if (n > max_vars || n > 62)
    throw Error("exhaustive search over " + std::to_string(n) + " variables exceeds limit " +
                std::to_string(max_vars));
  std::vector<double> s(n, 1.0);
  std::vector<double> g(n);
  auto resync = [&] {
    gradient_unchecked(poly, s.data(), g.data());
    return evaluate(poly, std::span<const double>(s));
  };
  double energy = resync();
  double best = energy;
  std::uint64_t best_mask = 0;
  std::uint64_t mask = 0;
  const std::uint64_t states = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < states; ++k) {
    const auto i = static_cast<Var>(std::countr_zero(k));
    energy += -2.0 * s[i] * g[i];
    s[i] = -s[i];
    mask ^= std::uint64_t{1} << i;
    for (std::uint32_t tk : poly.terms_of(i)) {
      const auto t = poly[tk];
      for (Var j : t.vars) {
        if (j == i) continue;
        double contrib = t.coeff;
        for (Var m : t.vars)
          if (m != j) contrib *= s[m];
        g[j] += 2.0 * contrib;
      }
    }
    if ((k & 0xFFF) == 0) energy = resync();
    if (energy < best) {
      best = energy;
      best_mask = mask;
    }
  }
  ExhaustiveResult out;
  out.spins = spins_from_mask(best_mask, n);
  out.energy = evaluate(poly, std::span<const Spin>(out.spins));
  return out;
}

PolySpec parse_pubo(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t header_line = 0;
  bool have_header = false;
  std::size_t n_vars = 0;
  std::size_t declared_terms = 0;
  std::vector<Term> terms;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;

    if (tok[0] == "p") {
      if (have_header) throw ParseError(line_no, "duplicate header");
      if (tok.size() != 4 || tok[1] != "pubo")
        throw ParseError(line_no, "header must be 'p pubo <n_vars> <n_terms>'");
      try {
        const double nv = parse_real(tok[2]);
        const double nt = parse_real(tok[3]);
        if (nv < 1 || nt < 0 || nv != std::floor(nv) || nt != std::floor(nt))
          throw Error("bad counts");
        n_vars = static_cast<std::size_t>(nv);
        declared_terms = static_cast<std::size_t>(nt);
      } catch (const ParseError&) {
        throw;
      } catch (const Error&) {
        throw ParseError(line_no, "header counts must be non-negative integers (n_vars >= 1)");
      }
      have_header = true;
      header_line = line_no;
      continue;
    }
    if (tok[0] == "t") {
      if (!have_header) throw ParseError(line_no, "term before header");
      if (tok.size() < 2) throw ParseError(line_no, "term line missing coefficient");
      Term t;
      try {
        t.coeff = parse_real(tok[1]);
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
      for (std::size_t i = 2; i < tok.size(); ++i) {
        std::uint64_t idx = 0;
        auto [end, ec] = std::from_chars(tok[i].data(), tok[i].data() + tok[i].size(), idx);
        if (ec != std::errc{} || end != tok[i].data() + tok[i].size())
          throw ParseError(line_no, "bad variable index '" + std::string(tok[i]) + "'");
        if (idx < 1 || idx > n_vars)
          throw ParseError(line_no, "variable index " + std::string(tok[i]) + " out of range 1.." +
                                        std::to_string(n_vars));
        t.vars.push_back(static_cast<Var>(idx - 1));
      }
      auto sorted = t.vars;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ParseError(line_no, "variable repeated within a term");
      terms.push_back(std::move(t));
      continue;
    }
    throw ParseError(line_no, "unrecognised line '" + std::string(line) + "'");
  }
  if (!have_header) throw ParseError(0, "missing 'p pubo' header");
  if (terms.size() != declared_terms)
    throw ParseError(header_line, "header declares " + std::to_string(declared_terms) +
                                      " terms, found " + std::to_string(terms.size()));
  return PolySpec(n_vars, std::move(terms));
}

PolySpec read_pubo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_pubo(buf.str());
}

std::string serialize_pubo(const PolySpec& poly, std::string_view comment) {
  std::string out;
  if (!comment.empty())
    for (auto line : split(comment, '\n')) {
      out += "# ";
      out += line;
      out += '\n';
    }
  out += "p pubo " + std::to_string(poly.n_vars()) + " " + std::to_string(poly.size()) + "\n";
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto t = poly[k];
    out += "t ";
    out += format_real(t.coeff);
    for (Var v : t.vars) {
      out += ' ';
      out += std::to_string(v + 1);
    }
    out += '\n';
  }
  return out;
}

void write_pubo(const std::filesystem::path& path, const PolySpec& poly, std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_pubo(poly, comment);
}

PolySpec prune(const PolySpec& poly, double tol) {
  auto terms = poly.terms();
  std::erase_if(terms, [tol](const Term& t) { return std::abs(t.coeff) <= tol; });
  return PolySpec(poly.n_vars(), std::move(terms));
}

}  // namespace polyising
