#include "rft/io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rft {

namespace {

constexpr std::uint16_t kVersion = 1;
const char kMagic[4] = {'R', 'F', 'L', 'D'};
const std::string kTextMagic = "RFLD-TEXT";

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename T>
  void le(T v) {
    std::uint8_t b[sizeof(T)];
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<std::uint8_t>(bits >> (8 * i));
    bytes(b, sizeof(T));
  }
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error("write failed: " + path);
  }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}
  template <typename T>
  T le() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, &bits, sizeof(T));
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw Error("truncated RFLD container");
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_header(Writer& w, const Mask& m, ContainerKind kind) {
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kVersion);
  w.le<std::uint8_t>(static_cast<std::uint8_t>(m.dim()));
  for (int n : m.dims()) w.le<std::uint32_t>(static_cast<std::uint32_t>(n));
  for (double h : m.spacing()) w.le<double>(h);
  w.le<std::uint8_t>(static_cast<std::uint8_t>(kind));
}

void write_inclusion(Writer& w, const Mask& m) {
  for (auto b : m.inclusion()) w.le<std::uint8_t>(b ? 1 : 0);
}

Container parse_binary(std::vector<std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error("not an RFLD container");
  Reader r(std::move(bytes));
  for (int i = 0; i < 4; ++i) r.le<std::uint8_t>();
  const auto version = r.le<std::uint16_t>();
  if (version != kVersion) throw Error("unsupported RFLD version " + std::to_string(version));
  const int D = r.le<std::uint8_t>();
  if (D < 1 || D > kMaxDim) throw Error("RFLD dimension must be 1, 2 or 3");
  std::vector<int> dims(D);
  std::int64_t total = 1;
  for (auto& n : dims) {
    n = static_cast<int>(r.le<std::uint32_t>());
    if (n <= 0) throw Error("RFLD dims must be positive");
    total *= n;
  }
  std::vector<double> spacing(D);
  for (auto& h : spacing) h = r.le<double>();
  const auto kind = r.le<std::uint8_t>();
  if (kind > 2) throw Error("unknown RFLD payload kind");
  Container c;
  c.kind = static_cast<ContainerKind>(kind);
  std::uint32_t N = 0, res = 0;
  if (c.kind == ContainerKind::sample) N = r.le<std::uint32_t>();
  if (c.kind == ContainerKind::field) res = r.le<std::uint32_t>();
  std::vector<std::uint8_t> inside(total);
  for (auto& b : inside) {
    b = r.le<std::uint8_t>();
    if (b > 1) throw Error("mask payload must be 0 or 1");
  }
  c.mask = std::make_shared<const Mask>(dims, spacing, inside);
  if (c.kind == ContainerKind::sample) {
    std::vector<double> data(static_cast<std::size_t>(N) * c.mask->voxel_count());
    for (auto& x : data) x = r.le<double>();
    c.sample.emplace(c.mask, static_cast<int>(N), std::move(data));
  } else if (c.kind == ContainerKind::field) {
    const bool grads = r.le<std::uint8_t>() != 0;
    ScalarField f;
    f.grid = FineGrid::build(c.mask, static_cast<int>(res));
    f.values.resize(f.grid->size());
    for (auto& x : f.values) x = r.le<double>();
    if (grads) {
      f.gradients.resize(f.grid->size() * D);
      for (auto& x : f.gradients) x = r.le<double>();
    }
    c.field = std::move(f);
  }
  if (!r.done()) throw Error("trailing bytes in RFLD container");
  return c;
}

// Text variant ---------------------------------------------------------------

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void text_header(std::ostream& os, const Mask& m, const std::string& kind) {
  os << kTextMagic << " 1\n";
  os << "kind " << kind << "\n";
  os << "dims";
  for (int n : m.dims()) os << ' ' << n;
  os << "\nspacing";
  for (double h : m.spacing()) os << ' ' << fmt(h);
  os << "\n";
}

void text_inclusion(std::ostream& os, const Mask& m) {
  os << "mask\n";
  const int last = m.dims().back();
  for (std::int64_t i = 0; i < m.lattice_size(); ++i) {
    os << (m.inclusion()[i] ? '1' : '0') << ((i + 1) % last == 0 ? '\n' : ' ');
  }
}

void save_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << body;
  if (!out) throw Error("write failed: " + path);
}

Container parse_text(const std::string& content) {
  std::istringstream in(content);
  // Strip comments line by line, then tokenise.
  std::vector<std::string> tokens;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> lt;
    while (ls >> tok) lt.push_back(tok);
    if (lt.empty()) continue;
    if (first) {
      if (lt.size() != 2 || lt[0] != kTextMagic || lt[1] != "1") throw Error("bad RFLD text header");
      first = false;
      continue;
    }
    tokens.insert(tokens.end(), lt.begin(), lt.end());
  }
  if (first) throw Error("empty RFLD text container");
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw Error("truncated RFLD text container");
    return tokens[pos++];
  };
  auto number = [&]() {
    const std::string& t = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw Error("");
      return v;
    } catch (...) {
      throw Error("bad number in RFLD text container: " + t);
    }
  };
  auto expect = [&](const std::string& key) {
    const std::string& t = next();
    if (t != key) throw Error("expected '" + key + "' in RFLD text container, got '" + t + "'");
  };
  expect("kind");
  const std::string kind = next();
  Container c;
  if (kind == "mask") {
    c.kind = ContainerKind::mask;
  } else if (kind == "sample") {
    c.kind = ContainerKind::sample;
  } else if (kind == "field") {
    c.kind = ContainerKind::field;
  } else {
    throw Error("unknown RFLD text kind: " + kind);
  }
  expect("dims");
  std::vector<int> dims;
  while (pos < tokens.size() && tokens[pos] != "spacing") dims.push_back(static_cast<int>(number()));
  expect("spacing");
  std::vector<double> spacing;
  for (std::size_t d = 0; d < dims.size(); ++d) spacing.push_back(number());
  int N = 0, res = 0;
  bool grads = false;
  if (c.kind == ContainerKind::sample) {
    expect("subjects");
    N = static_cast<int>(number());
  }
  if (c.kind == ContainerKind::field) {
    expect("r");
    res = static_cast<int>(number());
    expect("gradients");
    grads = number() != 0.0;
  }
  std::int64_t total = 1;
  for (int n : dims) total *= n;
  std::vector<std::uint8_t> inside(std::max<std::int64_t>(total, 0), 1);
  if (pos < tokens.size() && tokens[pos] == "mask") {
    ++pos;
    for (auto& b : inside) {
      const double v = number();
      if (v != 0.0 && v != 1.0) throw Error("mask payload must be 0 or 1");
      b = static_cast<std::uint8_t>(v);
    }
  }
  c.mask = std::make_shared<const Mask>(dims, spacing, inside);
  if (c.kind == ContainerKind::sample) {
    expect("values");
    std::vector<double> data(static_cast<std::size_t>(N) * c.mask->voxel_count());
    for (auto& x : data) x = number();
    c.sample.emplace(c.mask, N, std::move(data));
  } else if (c.kind == ContainerKind::field) {
    ScalarField f;
    f.grid = FineGrid::build(c.mask, res);
    expect("values");
    f.values.resize(f.grid->size());
    for (auto& x : f.values) x = number();
    if (grads) {
      expect("gradients");
      f.gradients.resize(f.grid->size() * c.mask->dim());
      for (auto& x : f.gradients) x = number();
    }
    c.field = std::move(f);
  }
  if (pos != tokens.size()) throw Error("trailing data in RFLD text container");
  return c;
}

}  // namespace

Container read_container(const std::string& path) {
  std::vector<std::uint8_t> bytes = slurp(path);
  if (bytes.size() >= kTextMagic.size() && std::memcmp(bytes.data(), kTextMagic.data(), kTextMagic.size()) == 0) {
    return parse_text(std::string(bytes.begin(), bytes.end()));
  }
  return parse_binary(std::move(bytes));
}

void write_mask(const std::string& path, const Mask& mask, bool text) {
  if (text) {
    std::ostringstream os;
    text_header(os, mask, "mask");
    text_inclusion(os, mask);
    save_text(path, os.str());
    return;
  }
  Writer w;
  write_header(w, mask, ContainerKind::mask);
  write_inclusion(w, mask);
  w.save(path);
}

void write_sample(const std::string& path, const LatticeSample& s, bool text) {
  if (text) {
    std::ostringstream os;
    text_header(os, s.mask(), "sample");
    os << "subjects " << s.subjects() << "\n";
    text_inclusion(os, s.mask());
    os << "values\n";
    for (int n = 0; n < s.subjects(); ++n) {
      for (std::int64_t v = 0; v < s.voxels(); ++v) os << fmt(s.at(n, v)) << (v + 1 == s.voxels() ? '\n' : ' ');
    }
    save_text(path, os.str());
    return;
  }
  Writer w;
  write_header(w, s.mask(), ContainerKind::sample);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(s.subjects()));
  write_inclusion(w, s.mask());
  for (double x : s.data()) w.le<double>(x);
  w.save(path);
}

void write_field(const std::string& path, const ScalarField& f, bool text) {
  if (!f.grid) throw Error("field has no grid");
  const Mask& m = f.grid->mask();
  if (text) {
    std::ostringstream os;
    text_header(os, m, "field");
    os << "r " << f.grid->resolution() << "\ngradients " << (f.has_gradients() ? 1 : 0) << "\n";
    text_inclusion(os, m);
    os << "values\n";
    for (std::size_t i = 0; i < f.values.size(); ++i) os << fmt(f.values[i]) << '\n';
    if (f.has_gradients()) {
      os << "gradients\n";
      const int D = m.dim();
      for (std::size_t i = 0; i < f.gradients.size(); ++i) {
        os << fmt(f.gradients[i]) << ((i + 1) % D == 0 ? '\n' : ' ');
      }
    }
    save_text(path, os.str());
    return;
  }
  Writer w;
  write_header(w, m, ContainerKind::field);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(f.grid->resolution()));
  write_inclusion(w, m);
  w.le<std::uint8_t>(f.has_gradients() ? 1 : 0);
  for (double x : f.values) w.le<double>(x);
  for (double x : f.gradients) w.le<double>(x);
  w.save(path);
}

Mask read_mask(const std::string& path) {
  const Container c = read_container(path);
  return *c.mask;
}

LatticeSample read_sample(const std::string& path) {
  Container c = read_container(path);
  if (c.kind != ContainerKind::sample) throw Error("container does not hold a sample: " + path);
  return std::move(*c.sample);
}

ScalarField read_field(const std::string& path) {
  Container c = read_container(path);
  if (c.kind != ContainerKind::field) throw Error("container does not hold a field: " + path);
  return std::move(*c.field);
}

}  // namespace rft
