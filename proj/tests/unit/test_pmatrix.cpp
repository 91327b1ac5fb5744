#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "stsdep/genrand.hpp"
#include "stsdep/pmatrix.hpp"

using namespace stsdep;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("stsdep_pm_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

PValueMatrix random_matrix(std::size_t m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(m * kBatterySize);
  for (auto& x : v) x = u(rng);
  v[0] = 0.0;
  v[1] = 1.0;
  v[2] = 1e-300;
  return PValueMatrix(PValueMatrix::all_items(), m, std::move(v), {{"source", "test"}, {"seed", seed}});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::EmptyInput;
}

}  // namespace

TEST(Matrix, RejectsOutOfRange) {
  std::vector<double> v(kBatterySize, 0.5);
  v[5] = 1.5;
  EXPECT_EQ(code_of([&] { PValueMatrix(PValueMatrix::all_items(), 1, v); }), ErrorCode::ValueOutOfRange);
  v[5] = std::nan("");
  EXPECT_EQ(code_of([&] { PValueMatrix(PValueMatrix::all_items(), 1, v); }), ErrorCode::ValueOutOfRange);
}

TEST(Matrix, BinaryRoundTripIsExact) {
  TempDir dir;
  auto mat = random_matrix(37, 1);
  save_matrix(mat, dir / "a.pvm");
  EXPECT_EQ(load_matrix(dir / "a.pvm"), mat);
  EXPECT_FALSE(fs::exists(dir / "a.pvm.partial"));
  EXPECT_EQ(slurp(dir / "a.pvm").substr(0, 4), "PVM1");
}

TEST(Matrix, CsvRoundTrip) {
  TempDir dir;
  auto mat = random_matrix(23, 2);
  save_matrix(mat, dir / "a.csv");
  auto back = load_matrix(dir / "a.csv");
  ASSERT_EQ(back.rows(), mat.rows());
  EXPECT_EQ(back.items(), mat.items());
  EXPECT_EQ(back.provenance(), mat.provenance());
  for (std::size_t i = 0; i < mat.values().size(); ++i) {
    EXPECT_LE(std::fabs(back.values()[i] - mat.values()[i]), 1e-12);
  }
  EXPECT_EQ(import_csv(dir / "a.csv"), back);
  auto text = slurp(dir / "a.csv");
  EXPECT_NE(text.find("\nseq_index,frequency,block-frequency,"), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Matrix, TruncatedBinaryIsFormatError) {
  TempDir dir;
  auto mat = random_matrix(5, 3);
  save_matrix(mat, dir / "a.pvm");
  const auto full = slurp(dir / "a.pvm");
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, std::size_t{200}, full.size() / 2, full.size() - 1}) {
    spit(dir / "t.pvm", full.substr(0, cut));
    EXPECT_EQ(code_of([&] { load_matrix(dir / "t.pvm"); }), ErrorCode::FormatError) << cut;
  }
  spit(dir / "t.pvm", full + "x");
  EXPECT_EQ(code_of([&] { load_matrix(dir / "t.pvm"); }), ErrorCode::FormatError);
}

TEST(Matrix, CorruptBinaryIsChecksumMismatch) {
  TempDir dir;
  save_matrix(random_matrix(5, 4), dir / "a.pvm");
  auto bytes = slurp(dir / "a.pvm");
  bytes[bytes.size() - 20] ^= 0x01;
  spit(dir / "c.pvm", bytes);
  EXPECT_EQ(code_of([&] { load_matrix(dir / "c.pvm"); }), ErrorCode::ChecksumMismatch);
}

TEST(Matrix, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_matrix("/nonexistent/x.pvm"); }), ErrorCode::IoError);
}

TEST(ImportCsv, ShuffledColumnsGiveCanonicalMatrix) {
  TempDir dir;
  auto mat = random_matrix(4, 5);
  std::vector<std::size_t> perm = PValueMatrix::all_items();
  std::mt19937 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::string text = "seq_index";
  for (auto i : perm) text += "," + canonical_items()[i].item_id;
  text += "\n";
  for (std::size_t j = 0; j < mat.rows(); ++j) {
    text += std::to_string(j + 1);
    for (auto i : perm) text += "," + detail::format_double(mat(j, i));
    text += "\n";
  }
  spit(dir / "s.csv", text);
  auto back = import_csv(dir / "s.csv");
  EXPECT_EQ(back.values(), mat.values());
  EXPECT_EQ(back.items(), mat.items());
}

TEST(ImportCsv, Errors) {
  TempDir dir;
  save_matrix(random_matrix(3, 6), dir / "a.csv");
  const auto text = slurp(dir / "a.csv");
  const auto header_end = text.find('\n', text.find("seq_index"));

  auto with_value = text.substr(0, header_end + 1) + "1,1.5" + text.substr(text.find(',', header_end + 3));
  spit(dir / "v.csv", with_value);
  EXPECT_EQ(code_of([&] { import_csv(dir / "v.csv"); }), ErrorCode::ValueOutOfRange);

  spit(dir / "r.csv", text + "4,0.5,0.5\n");
  EXPECT_EQ(code_of([&] { import_csv(dir / "r.csv"); }), ErrorCode::RaggedRow);

  auto unknown = text;
  unknown.replace(unknown.find(",frequency,"), 11, ",frequencyX,");
  spit(dir / "u.csv", unknown);
  EXPECT_EQ(code_of([&] { import_csv(dir / "u.csv"); }), ErrorCode::UnknownItem);

  spit(dir / "n.csv", text.substr(0, header_end + 1) + "1,abc" + text.substr(text.find(',', header_end + 3)));
  EXPECT_EQ(code_of([&] { import_csv(dir / "n.csv"); }), ErrorCode::FormatError);

  spit(dir / "e.csv", text.substr(0, header_end + 1));
  EXPECT_EQ(code_of([&] { import_csv(dir / "e.csv"); }), ErrorCode::FormatError);
}

TEST(ImportCsv, ExpectedSubset) {
  TempDir dir;
  spit(dir / "sub.csv", "runs,frequency\n0.25,0.75\n0.5,0.125\n");
  EXPECT_EQ(code_of([&] { import_csv(dir / "sub.csv"); }), ErrorCode::FormatError);
  auto mat = import_csv(dir / "sub.csv", std::vector<std::string>{"frequency", "runs"});
  EXPECT_EQ(mat.items(), (std::vector<std::size_t>{0, 4}));
  EXPECT_EQ(mat.values(), (std::vector<double>{0.75, 0.25, 0.125, 0.5}));
  EXPECT_EQ(code_of([&] { import_csv(dir / "sub.csv", std::vector<std::string>{"frequency", "rank"}); }),
            ErrorCode::FormatError);
}

TEST(Compute, ShapeAndRange) {
  GeneratorSpec g;
  auto seqs = make_sequence_set(g, 2, 10000);
  auto mat = compute_matrix(seqs, BatteryParams::defaults_for(10000));
  EXPECT_EQ(mat.rows(), 2u);
  EXPECT_EQ(mat.cols(), 162u);
  for (double v : mat.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(mat.provenance()["n"], 10000);
  EXPECT_FALSE(mat.provenance()["warnings"].empty());
}

TEST(Compute, WorkerCountDoesNotChangeBytes) {
  TempDir dir;
  GeneratorSpec g;
  g.kind = GeneratorKind::Aes128Ctr;
  const std::size_t m = 70, n = 4096;
  auto params = BatteryParams::defaults_for(n);
  std::string first;
  for (std::size_t w : {1u, 3u, 8u}) {
    BitStream stream(g, 0);
    auto path = dir / ("w" + std::to_string(w) + ".pvm");
    compute_matrix_to_file(path, m, [&](std::size_t) { return stream.next_sequence(n); }, params, w,
                           {{"type", "test"}});
    auto bytes = slurp(path);
    if (first.empty()) first = bytes;
    EXPECT_EQ(bytes, first) << w;
  }
  auto seqs = make_sequence_set(g, m, n);
  auto in_memory = compute_matrix(seqs, params, 4, {{"type", "test"}});
  EXPECT_EQ(load_matrix(dir / "w1.pvm"), in_memory);
}

TEST(Compute, ErrorsCarryRowAndItemAndLeaveNoFile) {
  TempDir dir;
  auto params = BatteryParams::defaults_for(500);  // too short for rank
  GeneratorSpec g;
  BitStream stream(g, 0);
  try {
    compute_matrix_to_file(dir / "x.pvm", 3, [&](std::size_t) { return stream.next_sequence(500); }, params, 2,
                           {{"type", "test"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SequenceTooShort);
    EXPECT_TRUE(e.message().starts_with("sequence 1: rank: ")) << e.message();
  }
  EXPECT_FALSE(fs::exists(dir / "x.pvm"));
  EXPECT_FALSE(fs::exists(dir / "x.pvm.partial"));
}
