#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "rtlfsim/diagnostic.hpp"
#include "rtlfsim/logic/primitive.hpp"

using namespace rtlfsim;

namespace {

LogicBit from_char(char c) {
  switch (c) {
    case '0': return LogicBit::Zero;
    case '1': return LogicBit::One;
    case 'x': return LogicBit::X;
    default: return LogicBit::Z;
  }
}

const LogicBit kBits[] = {LogicBit::Zero, LogicBit::One, LogicBit::X, LogicBit::Z};

LogicVector bit(LogicBit b) { return LogicVector::from_bit(b); }

char eval1(PrimitiveKind k, std::vector<LogicBit> in) {
  std::vector<LogicVector> v;
  for (LogicBit b : in) v.push_back(bit(b));
  LogicVector r = eval_primitive(k, std::span<const LogicVector>(v));
  EXPECT_EQ(r.width(), 1u);
  return to_char(r.bit(0));
}

// Rows: a = 0 1 x z; columns: b = 0 1 x z.
void check_binary(PrimitiveKind k, const char* table[4]) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      EXPECT_EQ(eval1(k, {kBits[a], kBits[b]}), table[a][b])
          << to_string(k) << "(" << to_char(kBits[a]) << "," << to_char(kBits[b]) << ")";
}

}  // namespace

TEST(TruthTable, And) {
  const char* t[4] = {"0000", "01xx", "0xxx", "0xxx"};
  check_binary(PrimitiveKind::And, t);
}

TEST(TruthTable, Or) {
  const char* t[4] = {"01xx", "1111", "x1xx", "x1xx"};
  check_binary(PrimitiveKind::Or, t);
}

TEST(TruthTable, Xor) {
  const char* t[4] = {"01xx", "10xx", "xxxx", "xxxx"};
  check_binary(PrimitiveKind::Xor, t);
}

TEST(TruthTable, Nand) {
  const char* t[4] = {"1111", "10xx", "1xxx", "1xxx"};
  check_binary(PrimitiveKind::Nand, t);
}

TEST(TruthTable, Nor) {
  const char* t[4] = {"10xx", "0000", "x0xx", "x0xx"};
  check_binary(PrimitiveKind::Nor, t);
}

TEST(TruthTable, Xnor) {
  const char* t[4] = {"10xx", "01xx", "xxxx", "xxxx"};
  check_binary(PrimitiveKind::Xnor, t);
}

TEST(TruthTable, UnaryGates) {
  const char* not_t = "10xx";
  const char* buf_t = "01xz";
  const char* red_t = "01xx";
  for (int a = 0; a < 4; ++a) {
    EXPECT_EQ(eval1(PrimitiveKind::Not, {kBits[a]}), not_t[a]);
    EXPECT_EQ(eval1(PrimitiveKind::Buf, {kBits[a]}), buf_t[a]);
    EXPECT_EQ(eval1(PrimitiveKind::ReduceAnd, {kBits[a]}), red_t[a]);
    EXPECT_EQ(eval1(PrimitiveKind::ReduceOr, {kBits[a]}), red_t[a]);
    EXPECT_EQ(eval1(PrimitiveKind::ReduceXor, {kBits[a]}), red_t[a]);
  }
}

TEST(TruthTable, Mux2) {
  for (LogicBit s : kBits)
    for (LogicBit d0 : kBits)
      for (LogicBit d1 : kBits) {
        char want;
        if (s == LogicBit::Zero)
          want = to_char(d0);
        else if (s == LogicBit::One)
          want = to_char(d1);
        else
          want = d0 == d1 ? to_char(d0) : 'x';
        EXPECT_EQ(eval1(PrimitiveKind::Mux2, {s, d0, d1}), want)
            << to_char(s) << " " << to_char(d0) << " " << to_char(d1);
      }
}

TEST(TruthTable, Resolve) {
  const char* table[4] = {"0xx0", "x1x1", "xxxx", "01xz"};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      std::vector<LogicVector> d{bit(kBits[a]), bit(kBits[b])};
      EXPECT_EQ(to_char(resolve_drivers(d).bit(0)), table[a][b]);
    }
}

TEST(LogicVector, ParseAndPrint) {
  EXPECT_EQ(LogicVector::parse("4'b10xz").to_string(), "4'b10xz");
  EXPECT_EQ(LogicVector::parse("8'hff").to_uint(), 255u);
  EXPECT_EQ(LogicVector::parse("8'd300").to_uint(), 300u & 0xff);
  EXPECT_EQ(LogicVector::parse("6'o17").to_string(), "6'b001111");
  EXPECT_EQ(LogicVector::parse("4'bx").to_string(), "4'bxxxx");
  EXPECT_THROW(LogicVector::parse("4'q1"), std::invalid_argument);
}

TEST(LogicVector, WideSlices) {
  LogicVector v(130, LogicBit::Zero);
  v.set_bit(0, LogicBit::One);
  v.set_bit(64, LogicBit::X);
  v.set_bit(129, LogicBit::Z);
  EXPECT_EQ(v.slice(63, 3).to_string(), "3'b0x0");
  LogicVector w = v;
  w.assign_slice(62, LogicVector::from_uint(4, 0xf));
  EXPECT_EQ(w.slice(60, 8).to_string(), "8'b00111100");
  EXPECT_EQ(v.resized(1).to_string(), "1'b1");
  EXPECT_EQ(v.resized(200).width(), 200u);
  EXPECT_NE(v, w);
  EXPECT_TRUE(v.has_unknown());
}

TEST(Primitive, WidthRules) {
  std::vector<uint32_t> ab{4, 6};
  EXPECT_EQ(result_width(PrimitiveKind::Add, ab), 6u);
  EXPECT_EQ(result_width(PrimitiveKind::Mul, ab), 10u);
  EXPECT_EQ(result_width(PrimitiveKind::Eq, ab), 1u);
  EXPECT_EQ(result_width(PrimitiveKind::Concat, ab), 10u);
  EXPECT_THROW(result_width(PrimitiveKind::And, ab), StructuralError);
}

TEST(Primitive, Arithmetic) {
  auto v = [](uint32_t w, uint64_t x) { return LogicVector::from_uint(w, x); };
  std::vector<LogicVector> in{v(8, 200), v(8, 100)};
  EXPECT_EQ(eval_primitive(PrimitiveKind::Add, std::span<const LogicVector>(in)).to_uint(), 44u);
  EXPECT_EQ(eval_primitive(PrimitiveKind::Sub, std::span<const LogicVector>(in)).to_uint(), 100u);
  EXPECT_EQ(eval_primitive(PrimitiveKind::Mul, std::span<const LogicVector>(in)).to_uint(), 20000u);
  EXPECT_EQ(eval_primitive(PrimitiveKind::LtUnsigned, std::span<const LogicVector>(in)).to_uint(), 0u);
  in[1].set_bit(3, LogicBit::Z);
  EXPECT_EQ(eval_primitive(PrimitiveKind::Add, std::span<const LogicVector>(in)).to_string(), "8'bxxxxxxxx");
  std::vector<LogicVector> sh{v(8, 0x81), v(3, 1)};
  EXPECT_EQ(eval_primitive(PrimitiveKind::Shl, std::span<const LogicVector>(sh)).to_uint(), 0x02u);
  EXPECT_EQ(eval_primitive(PrimitiveKind::ShrLogical, std::span<const LogicVector>(sh)).to_uint(), 0x40u);
}

namespace {

struct Case {
  PrimitiveKind kind;
  std::vector<LogicVector> in;
  PrimitiveParams params;
};

LogicVector random_vec(std::mt19937_64& rng, uint32_t w, int unknown_pct) {
  LogicVector v(w, LogicBit::Zero);
  for (uint32_t i = 0; i < w; ++i) {
    int r = static_cast<int>(rng() % 100);
    if (r < unknown_pct / 2)
      v.set_bit(i, LogicBit::X);
    else if (r < unknown_pct)
      v.set_bit(i, LogicBit::Z);
    else
      v.set_bit(i, rng() & 1 ? LogicBit::One : LogicBit::Zero);
  }
  return v;
}

Case random_case(std::mt19937_64& rng) {
  static const PrimitiveKind kinds[] = {
      PrimitiveKind::And,  PrimitiveKind::Or,         PrimitiveKind::Xor,       PrimitiveKind::Not,
      PrimitiveKind::Buf,  PrimitiveKind::Nand,       PrimitiveKind::Nor,       PrimitiveKind::Xnor,
      PrimitiveKind::Mux2, PrimitiveKind::Add,        PrimitiveKind::Sub,       PrimitiveKind::Mul,
      PrimitiveKind::Eq,   PrimitiveKind::Neq,        PrimitiveKind::LtUnsigned, PrimitiveKind::Shl,
      PrimitiveKind::ShrLogical, PrimitiveKind::Concat, PrimitiveKind::Slice,    PrimitiveKind::ReduceAnd,
      PrimitiveKind::ReduceOr, PrimitiveKind::ReduceXor, PrimitiveKind::Cond,    PrimitiveKind::Resolve};
  Case c;
  c.kind = kinds[rng() % std::size(kinds)];
  uint32_t w = 1 + static_cast<uint32_t>(rng() % 70);
  uint32_t w2 = 1 + static_cast<uint32_t>(rng() % 70);
  int unk = static_cast<int>(rng() % 3) * 5;
  auto r = [&](uint32_t width) { return random_vec(rng, width, unk); };
  switch (c.kind) {
    case PrimitiveKind::Not:
    case PrimitiveKind::Buf:
    case PrimitiveKind::ReduceAnd:
    case PrimitiveKind::ReduceOr:
    case PrimitiveKind::ReduceXor: c.in = {r(w)}; break;
    case PrimitiveKind::Mux2: c.in = {r(1), r(w), r(w)}; break;
    case PrimitiveKind::Cond: c.in = {r(w2 % 4 + 1), r(w), r(w)}; break;
    case PrimitiveKind::Add:
    case PrimitiveKind::Sub:
    case PrimitiveKind::Eq:
    case PrimitiveKind::Neq:
    case PrimitiveKind::LtUnsigned:
    case PrimitiveKind::Concat: c.in = {r(w), r(w2)}; break;
    case PrimitiveKind::Mul: c.in = {r(w % 33 + 1), r(w2 % 33 + 1)}; break;
    case PrimitiveKind::Shl:
    case PrimitiveKind::ShrLogical: c.in = {r(w), r(w2 % 7 + 1)}; break;
    case PrimitiveKind::Slice:
      c.in = {r(w)};
      c.params.lsb = static_cast<uint32_t>(rng() % w);
      c.params.width = 1 + static_cast<uint32_t>(rng() % (w - c.params.lsb));
      break;
    case PrimitiveKind::Resolve: c.in = {r(w), r(w), r(w)}; break;
    default: c.in = {r(w), r(w)}; break;
  }
  return c;
}

}  // namespace

// Replacing input bits by X never turns an output bit into a different known
// value: every known bit of the abstract result agrees with the concrete one.
TEST(Property, XMonotonicity) {
  std::mt19937_64 rng(20261014);
  int checked = 0;
  for (int iter = 0; iter < 10000; ++iter) {
    Case c = random_case(rng);
    LogicVector concrete = eval_primitive(c.kind, std::span<const LogicVector>(c.in), c.params);
    std::vector<LogicVector> abs = c.in;
    for (auto& v : abs)
      for (uint32_t i = 0; i < v.width(); ++i)
        if (rng() % 4 == 0) v.set_bit(i, LogicBit::X);
    LogicVector abstract = eval_primitive(c.kind, std::span<const LogicVector>(abs), c.params);
    ASSERT_EQ(concrete.width(), abstract.width());
    for (uint32_t i = 0; i < abstract.width(); ++i) {
      LogicBit b = abstract.bit(i);
      if (b == LogicBit::Zero || b == LogicBit::One) {
        ASSERT_EQ(concrete.bit(i), b) << to_string(c.kind) << " iteration " << iter << " bit " << i;
      }
    }
    ++checked;
  }
  EXPECT_EQ(checked, 10000);
}

TEST(Property, ResolveCommutativeAssociative) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 10000; ++iter) {
    uint32_t w = 1 + static_cast<uint32_t>(rng() % 100);
    int unk = 10 + static_cast<int>(rng() % 60);
    LogicVector a = random_vec(rng, w, unk), b = random_vec(rng, w, unk), c = random_vec(rng, w, unk);
    auto res = [](std::vector<LogicVector> v) { return resolve_drivers(v); };
    ASSERT_EQ(res({a, b}), res({b, a}));
    LogicVector left = res({res({a, b}), c});
    LogicVector right = res({a, res({b, c})});
    ASSERT_EQ(left, right);
    ASSERT_EQ(left, res({a, b, c}));
    ASSERT_EQ(res({c, a, b}), res({a, b, c}));
  }
}

TEST(Primitive, ResolveErrors) {
  std::vector<LogicVector> none;
  EXPECT_THROW(resolve_drivers(none), StructuralError);
  std::vector<LogicVector> mixed{LogicVector(2), LogicVector(3)};
  EXPECT_THROW(resolve_drivers(mixed), StructuralError);
}

TEST(Primitive, TruthValue) {
  EXPECT_EQ(truth_value(LogicVector::parse("3'b0x1")), LogicBit::One);
  EXPECT_EQ(truth_value(LogicVector::parse("3'b000")), LogicBit::Zero);
  EXPECT_EQ(truth_value(LogicVector::parse("3'b0z0")), LogicBit::X);
}
