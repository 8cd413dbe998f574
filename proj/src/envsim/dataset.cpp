#include "cvo/envsim/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "cvo/core/contract.hpp"

namespace cvo::envsim {

std::array<std::size_t, 3> split_sizes(std::size_t n) {
  constexpr std::array<std::size_t, 3> kPercent = {82, 6, 12};
  std::array<std::size_t, 3> sizes{};
  std::array<std::size_t, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sizes[i] = n * kPercent[i] / 100;
    remainder[i] = n * kPercent[i] % 100;
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i]];
  return sizes;
}

ExperienceDataset build_experience(const ApartmentSpec& apartment, std::size_t n_samples, Rng& rng,
                                   const ExperienceParams& params) {
  require(n_samples >= 50, "build_experience: n_samples must be >= 50");
  std::vector<StepRecord> pool;
  pool.reserve(n_samples + static_cast<std::size_t>(params.trajectory_steps));
  while (pool.size() < n_samples) {
    auto traj = sample_trajectory(apartment, params.policy, rng, params.trajectory_steps);
    for (auto& r : traj) pool.push_back(std::move(r));
  }
  pool.resize(n_samples);

  std::vector<std::size_t> order(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
  rng.shuffle(order);
  const auto sizes = split_sizes(n_samples);

  ExperienceDataset ds;
  ds.apartment_id = apartment.id;
  ds.n_rays = apartment.sensor.n_rays;
  std::vector<StepRecord>* splits[3] = {&ds.train, &ds.val, &ds.test};
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<std::size_t> idx(order.begin() + cursor, order.begin() + cursor + sizes[s]);
    cursor += sizes[s];
    std::sort(idx.begin(), idx.end());
    splits[s]->reserve(idx.size());
    for (std::size_t i : idx) splits[s]->push_back(std::move(pool[i]));
  }
  return ds;
}

namespace {

// The volatile keeps the round trip from being folded away: g++ 11 at -O3
// vectorizes the two adjacent displacement fields and drops the conversion.
double to_f32(double v) {
  volatile float f = static_cast<float>(v);
  return f;
}

void quantize(StepRecord& r) {
  for (double& v : r.scan_t) v = to_f32(v);
  for (double& v : r.scan_t1) v = to_f32(v);
  r.gt.dz = to_f32(r.gt.dz);
  r.gt.dx = to_f32(r.gt.dx);
  r.gt.dtheta = to_f32(r.gt.dtheta);
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(double v) { put(std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4); }
  void raw(const char* s, std::size_t n) { bytes_.insert(bytes_.end(), s, s + n); }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  double f32() { return std::bit_cast<float>(u32()); }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::uint64_t get(int n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("dataset file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void quantize_to_storage(ExperienceDataset& dataset) {
  for (auto* split : {&dataset.train, &dataset.val, &dataset.test})
    for (auto& r : *split) quantize(r);
}

void write_dataset(const std::filesystem::path& path, const ExperienceDataset& dataset) {
  ByteWriter w;
  w.raw("CVOD", 4);
  w.u16(kDatasetFormatVersion);
  w.u32(dataset.apartment_id);
  w.u16(static_cast<std::uint16_t>(dataset.n_rays));
  w.u32(static_cast<std::uint32_t>(dataset.train.size()));
  w.u32(static_cast<std::uint32_t>(dataset.val.size()));
  w.u32(static_cast<std::uint32_t>(dataset.test.size()));
  for (const auto* split : {&dataset.train, &dataset.val, &dataset.test}) {
    for (const auto& r : *split) {
      require(static_cast<int>(r.scan_t.size()) == dataset.n_rays &&
                  r.scan_t1.size() == r.scan_t.size(),
              "write_dataset: scan length does not match n_rays");
      for (double v : r.scan_t) w.f32(v);
      for (double v : r.scan_t1) w.f32(v);
      w.u8(static_cast<std::uint8_t>(r.action));
      w.f32(r.gt.dz);
      w.f32(r.gt.dx);
      w.f32(r.gt.dtheta);
      w.u8(r.collided ? 1 : 0);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ExperienceDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "CVOD", 4) != 0)
    throw std::runtime_error(path.string() + ": bad magic");
  ByteReader r(std::move(bytes));
  for (int i = 0; i < 4; ++i) r.u8();
  const auto version = r.u16();
  if (version != kDatasetFormatVersion)
    throw std::runtime_error(path.string() + ": unsupported format version " +
                             std::to_string(version));
  ExperienceDataset ds;
  ds.apartment_id = r.u32();
  ds.n_rays = r.u16();
  const std::uint32_t counts[3] = {r.u32(), r.u32(), r.u32()};
  std::vector<StepRecord>* splits[3] = {&ds.train, &ds.val, &ds.test};
  for (int s = 0; s < 3; ++s) {
    splits[s]->resize(counts[s]);
    for (auto& rec : *splits[s]) {
      rec.scan_t.resize(ds.n_rays);
      rec.scan_t1.resize(ds.n_rays);
      for (double& v : rec.scan_t) v = r.f32();
      for (double& v : rec.scan_t1) v = r.f32();
      const auto code = r.u8();
      if (code > 2) throw std::runtime_error(path.string() + ": bad action code");
      rec.action = static_cast<Action>(code);
      rec.gt.dz = r.f32();
      rec.gt.dx = r.f32();
      rec.gt.dtheta = r.f32();
      rec.collided = r.u8() != 0;
    }
  }
  if (!r.at_end()) throw std::runtime_error(path.string() + ": trailing bytes");
  return ds;
}

void export_csv(const std::filesystem::path& path, const ExperienceDataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "split,index";
  for (int i = 0; i < dataset.n_rays; ++i) out << ",scan_t_" << i;
  for (int i = 0; i < dataset.n_rays; ++i) out << ",scan_t1_" << i;
  out << ",action,dz,dx,dtheta,collided\n";
  char buf[64];
  auto num = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
    out.write(buf, res.ptr - buf);
  };
  const char* names[3] = {"train", "val", "test"};
  const std::vector<StepRecord>* splits[3] = {&dataset.train, &dataset.val, &dataset.test};
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < splits[s]->size(); ++i) {
      const auto& rec = (*splits[s])[i];
      out << names[s] << ',' << i;
      for (double v : rec.scan_t) out << ',', num(v);
      for (double v : rec.scan_t1) out << ',', num(v);
      out << ',' << action_name(rec.action) << ',';
      num(rec.gt.dz);
      out << ',';
      num(rec.gt.dx);
      out << ',';
      num(rec.gt.dtheta);
      out << ',' << (rec.collided ? 1 : 0) << '\n';
    }
  }
}

}  // namespace cvo::envsim
