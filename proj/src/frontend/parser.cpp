#include "rtlfsim/frontend/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace rtlfsim {

SourceUnit load_sources(const std::vector<std::string>& paths, std::string top) {
  SourceUnit unit;
  unit.top_module_name = std::move(top);
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read design file '" + p + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    unit.files.push_back({p, ss.str()});
  }
  return unit;
}

namespace {

enum class Tok { Ident, Number, SysIdent, Directive, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
  LogicVector value;  // Number
  bool sized = false;
};

const std::unordered_set<std::string> kKeywords = {
    "module", "endmodule", "input",  "output", "inout",     "wire",       "reg",     "assign", "initial",
    "always", "begin",     "end",    "if",     "else",      "case",       "endcase", "default", "posedge",
    "negedge", "or",       "parameter", "localparam"};

// Recognized Verilog keywords that sit outside the subset.
const std::unordered_set<std::string> kUnsupported = {
    "function", "endfunction", "task",    "endtask", "generate", "endgenerate", "genvar",  "for",
    "while",    "repeat",      "forever", "casez",   "casex",    "integer",     "real",    "time",
    "fork",     "join",        "wait",    "disable", "force",    "release",     "deassign", "specify",
    "endspecify", "primitive", "endprimitive", "table", "event",  "signed",      "supply0", "supply1",
    "tri",      "wand",        "wor",     "trireg",  "defparam", "automatic",   "realtime", "and",
    "nand",     "nor",         "xor",     "xnor",    "not",      "buf",         "bufif0",  "bufif1",
    "notif0",   "notif1",      "pullup",  "pulldown", "tran",    "cmos",        "nmos",    "pmos"};

class Lexer {
public:
  Lexer(std::string_view text, const std::string& path) : text_(text), path_(path) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = loc();
      if (pos_ >= text_.size()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      char c = text_[pos_];
      if (c == '`') {
        size_t start = pos_;
        advance();
        while (pos_ < text_.size() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_')) advance();
        std::string name(text_.substr(start, pos_ - start));
        if (name == "`timescale") {
          while (pos_ < text_.size() && text_[pos_] != '\n') advance();
          continue;
        }
        throw CompileError(t.loc, "unsupported construct: compiler directive '" + name + "'");
      }
      if (std::isalpha(uc(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '$'))
          advance();
        t.kind = Tok::Ident;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (c == '\\') {
        throw CompileError(t.loc, "unsupported construct: escaped identifier");
      } else if (c == '$') {
        size_t start = pos_;
        advance();
        while (pos_ < text_.size() && (std::isalnum(uc(text_[pos_])) || text_[pos_] == '_')) advance();
        t.kind = Tok::SysIdent;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (std::isdigit(uc(c)) || c == '\'') {
        lex_number(t);
      } else if (c == '"') {
        throw CompileError(t.loc, "unsupported construct: string literal");
      } else {
        static const char* ops[] = {"===", "!==", "<<<", ">>>", "==", "!=", "<=", ">=", "&&", "||", "<<",
                                    ">>",  "~&",  "~|",  "~^",  "^~", "**", "+:", "-:", "->"};
        t.kind = Tok::Op;
        for (const char* op : ops) {
          std::string_view o(op);
          if (text_.substr(pos_, o.size()) == o) {
            t.text = std::string(o);
            break;
          }
        }
        if (t.text.empty()) {
          if (std::string_view("()[]{};:,.#@=+-*/%&|^~!<>?").find(c) == std::string_view::npos)
            throw CompileError(t.loc, std::string("unexpected character '") + c + "'");
          t.text = std::string(1, c);
        }
        for (size_t i = 0; i < t.text.size(); ++i) advance();
      }
      out.push_back(std::move(t));
    }
  }

private:
  static unsigned char uc(char c) { return static_cast<unsigned char>(c); }

  SourceLoc loc() const { return SourceLoc{path_, line_, col_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(uc(c))) {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        SourceLoc start = loc();
        advance();
        advance();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= text_.size()) throw CompileError(start, "unterminated block comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string take_digits(bool based) {
    std::string d;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      bool ok = std::isdigit(uc(c)) || c == '_' ||
                (based && (std::isxdigit(uc(c)) || c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?'));
      if (!ok) break;
      d.push_back(c);
      advance();
    }
    return d;
  }

  void lex_number(Token& t) {
    t.kind = Tok::Number;
    uint64_t size = 0;
    bool have_size = false;
    std::string size_text;
    if (text_[pos_] != '\'') {
      size_text = take_digits(false);
      have_size = true;
    }
    // Optional whitespace between size and base.
    size_t save_pos = pos_;
    uint32_t save_line = line_, save_col = col_;
    while (have_size && pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) advance();
    if (pos_ >= text_.size() || text_[pos_] != '\'') {
      pos_ = save_pos;
      line_ = save_line;
      col_ = save_col;
      // Plain decimal integer: minimal width, unsized.
      std::string digits;
      for (char c : size_text)
        if (c != '_') digits.push_back(c);
      unsigned __int128 v = 0;
      for (char c : digits) {
        v = v * 10 + static_cast<unsigned>(c - '0');
        if (v > UINT64_MAX) throw CompileError(t.loc, "integer literal too large: " + size_text);
      }
      uint64_t u = static_cast<uint64_t>(v);
      uint32_t w = 1;
      while (w < 64 && (u >> w) != 0) ++w;
      t.value = LogicVector::from_uint(w, u);
      t.sized = false;
      t.text = size_text;
      return;
    }
    if (have_size) {
      for (char c : size_text) {
        if (c == '_') continue;
        size = size * 10 + static_cast<uint64_t>(c - '0');
        if (size > 65536) throw CompileError(t.loc, "literal width too large");
      }
      if (size == 0) throw CompileError(t.loc, "zero-width literal");
    }
    advance();  // '
    if (pos_ < text_.size() && (text_[pos_] == 's' || text_[pos_] == 'S'))
      throw CompileError(t.loc, "unsupported construct: signed literal");
    if (pos_ >= text_.size()) throw CompileError(t.loc, "malformed based literal");
    char base = static_cast<char>(std::tolower(uc(text_[pos_])));
    if (base != 'b' && base != 'o' && base != 'd' && base != 'h')
      throw CompileError(t.loc, std::string("malformed based literal: bad base '") + text_[pos_] + "'");
    advance();
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) advance();
    std::string digits = take_digits(true);
    std::string clean;
    for (char c : digits)
      if (c != '_') clean.push_back(c);
    if (clean.empty()) throw CompileError(t.loc, "malformed based literal: no digits");
    uint32_t width;
    if (have_size) {
      width = static_cast<uint32_t>(size);
    } else if (base == 'd') {
      width = 64;
    } else {
      uint32_t per = base == 'b' ? 1 : base == 'o' ? 3 : 4;
      width = static_cast<uint32_t>(clean.size()) * per;
    }
    try {
      t.value = LogicVector::from_based(width, base, clean);
    } catch (const std::invalid_argument& e) {
      throw CompileError(t.loc, std::string("malformed based literal: ") + e.what());
    }
    if (!have_size && base == 'd' && t.value.is_known()) {
      uint64_t u = *t.value.to_uint();
      uint32_t w = 1;
      while (w < 64 && (u >> w) != 0) ++w;
      t.value = LogicVector::from_uint(w, u);
    } else if (!have_size && base == 'd') {
      t.value = LogicVector(1, t.value.bit(0));
    }
    t.sized = have_size;
    t.text = size_text + "'" + base + digits;
  }

  std::string_view text_;
  std::string path_;
  size_t pos_ = 0;
  uint32_t line_ = 1;
  uint32_t col_ = 1;
};

class Parser {
public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  void parse_into(ast::Ast& out) {
    while (!at_end()) {
      if (is_kw("module")) {
        out.modules.push_back(parse_module());
      } else {
        fail_unexpected("'module'");
      }
    }
  }

private:
  // ---- token helpers --------------------------------------------------
  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_op(std::string_view op, size_t k = 0) const { return peek(k).kind == Tok::Op && peek(k).text == op; }
  bool is_kw(std::string_view kw, size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == kw; }
  bool accept_op(std::string_view op) {
    if (!is_op(op)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of file";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail_unexpected(const std::string& expected) {
    const Token& t = peek();
    if (t.kind == Tok::Ident && kUnsupported.count(t.text))
      throw CompileError(t.loc, "unsupported construct: '" + t.text + "'");
    if (t.kind == Tok::SysIdent)
      throw CompileError(t.loc, "unsupported construct: system task or function '" + t.text + "'");
    throw CompileError(t.loc, "syntax error: expected " + expected + ", found " + describe(t));
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail_unexpected("'" + std::string(op) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail_unexpected("'" + std::string(kw) + "'");
  }

  std::string expect_ident() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || kKeywords.count(t.text) || kUnsupported.count(t.text)) fail_unexpected("identifier");
    next();
    return t.text;
  }

  // ---- module level ---------------------------------------------------
  ast::Module parse_module() {
    ast::Module m;
    m.loc = peek().loc;
    expect_kw("module");
    m.name = expect_ident();
    if (accept_op("#")) {
      expect_op("(");
      if (!is_op(")")) {
        do {
          ast::ParamDecl p;
          p.loc = peek().loc;
          accept_kw("parameter");
          p.name = expect_ident();
          expect_op("=");
          p.value = parse_expr();
          m.params.push_back(std::move(p));
        } while (accept_op(","));
      }
      expect_op(")");
    }
    if (accept_op("(")) {
      if (!is_op(")")) parse_port_list(m);
      expect_op(")");
    }
    expect_op(";");
    while (!accept_kw("endmodule")) {
      if (at_end()) fail_unexpected("'endmodule'");
      parse_module_item(m);
    }
    return m;
  }

  bool at_direction() const { return is_kw("input") || is_kw("output") || is_kw("inout"); }

  ast::PortDir parse_direction() {
    const Token& t = next();
    if (t.text == "input") return ast::PortDir::Input;
    if (t.text == "output") return ast::PortDir::Output;
    return ast::PortDir::Inout;
  }

  std::optional<ast::Range> parse_opt_range() {
    if (!is_op("[")) return std::nullopt;
    next();
    ast::Range r;
    r.msb = parse_expr();
    expect_op(":");
    r.lsb = parse_expr();
    expect_op("]");
    return r;
  }

  static std::optional<ast::Range> clone_range(const std::optional<ast::Range>& r);

  void parse_port_list(ast::Module& m) {
    if (at_direction()) {
      // ANSI style; direction/type/range carry over to following names.
      ast::PortDir dir = ast::PortDir::Input;
      bool is_reg = false;
      std::optional<ast::Range> range;
      do {
        SourceLoc loc = peek().loc;
        if (at_direction()) {
          dir = parse_direction();
          is_reg = false;
          if (accept_kw("reg")) {
            is_reg = true;
          } else {
            accept_kw("wire");
          }
          if (is_kw("signed")) fail_unexpected("port type");
          range = parse_opt_range();
        }
        ast::PortDecl p;
        p.loc = loc;
        p.dir = dir;
        p.is_reg = is_reg;
        p.range = clone_range(range);
        p.name = expect_ident();
        m.port_order.push_back(p.name);
        m.ports.push_back(std::move(p));
      } while (accept_op(","));
      return;
    }
    do {
      m.port_order.push_back(expect_ident());
    } while (accept_op(","));
  }

  void parse_module_item(ast::Module& m) {
    SourceLoc loc = peek().loc;
    if (at_direction()) {
      ast::PortDir dir = parse_direction();
      bool is_reg = false;
      if (accept_kw("reg")) {
        is_reg = true;
      } else {
        accept_kw("wire");
      }
      auto range = parse_opt_range();
      do {
        ast::PortDecl p;
        p.loc = peek().loc;
        p.dir = dir;
        p.is_reg = is_reg;
        p.range = clone_range(range);
        p.name = expect_ident();
        m.ports.push_back(std::move(p));
      } while (accept_op(","));
      expect_op(";");
      return;
    }
    if (is_kw("wire") || is_kw("reg")) {
      ast::NetType type = next().text == "wire" ? ast::NetType::Wire : ast::NetType::Reg;
      auto range = parse_opt_range();
      do {
        ast::NetDecl d;
        d.loc = peek().loc;
        d.type = type;
        d.range = clone_range(range);
        d.name = expect_ident();
        if (is_op("[")) throw CompileError(peek().loc, "unsupported construct: memory (unpacked array) declaration");
        if (accept_op("=")) {
          if (type == ast::NetType::Reg)
            throw CompileError(d.loc, "unsupported construct: reg initializer (use an initial block)");
          d.init = parse_expr();
        }
        m.nets.push_back(std::move(d));
      } while (accept_op(","));
      expect_op(";");
      return;
    }
    if (is_kw("parameter") || is_kw("localparam")) {
      bool local = next().text == "localparam";
      if (is_op("[")) throw CompileError(peek().loc, "unsupported construct: ranged parameter");
      do {
        ast::ParamDecl p;
        p.loc = peek().loc;
        p.local = local;
        p.name = expect_ident();
        expect_op("=");
        p.value = parse_expr();
        m.params.push_back(std::move(p));
      } while (accept_op(","));
      expect_op(";");
      return;
    }
    if (accept_kw("assign")) {
      ast::ExprPtr delay;
      if (accept_op("#")) delay = parse_delay_value();
      do {
        ast::ContAssign a;
        a.loc = peek().loc;
        if (delay) a.delay = clone_expr(*delay);
        a.lhs = parse_lvalue();
        expect_op("=");
        a.rhs = parse_expr();
        m.assigns.push_back(std::move(a));
      } while (accept_op(","));
      expect_op(";");
      return;
    }
    if (is_kw("initial") || is_kw("always")) {
      ast::ProcBlock b;
      b.loc = loc;
      b.kind = next().text == "initial" ? ast::ProcKind::Initial : ast::ProcKind::Always;
      if (is_op("@")) {
        if (b.kind == ast::ProcKind::Initial)
          throw CompileError(peek().loc, "unsupported construct: event control in initial block");
        next();
        b.has_event_control = true;
        parse_sensitivity(b);
      }
      b.body = parse_stmt();
      m.procs.push_back(std::move(b));
      return;
    }
    const Token& t = peek();
    if (t.kind == Tok::Ident && !kKeywords.count(t.text) && !kUnsupported.count(t.text)) {
      m.instances.push_back(parse_instance());
      return;
    }
    fail_unexpected("module item");
  }

  void parse_sensitivity(ast::ProcBlock& b) {
    if (accept_op("*")) {
      b.star = true;
      return;
    }
    expect_op("(");
    if (accept_op("*")) {
      b.star = true;
      expect_op(")");
      return;
    }
    do {
      ast::SensItem s;
      s.loc = peek().loc;
      if (accept_kw("posedge")) {
        s.edge = ast::EdgeKind::Posedge;
      } else if (accept_kw("negedge")) {
        s.edge = ast::EdgeKind::Negedge;
      }
      s.signal = parse_primary();
      if (s.signal->kind != ast::ExprKind::Ident && s.signal->kind != ast::ExprKind::BitSelect)
        throw CompileError(s.loc, "sensitivity list entries must be signals");
      b.sensitivity.push_back(std::move(s));
    } while (accept_op(",") || accept_kw("or"));
    expect_op(")");
  }

  ast::Instance parse_instance() {
    ast::Instance inst;
    inst.loc = peek().loc;
    inst.module_name = expect_ident();
    if (accept_op("#")) {
      expect_op("(");
      if (!is_op(")")) {
        do {
          ast::Connection c;
          c.loc = peek().loc;
          if (accept_op(".")) {
            c.name = expect_ident();
            expect_op("(");
            c.expr = parse_expr();
            expect_op(")");
          } else {
            c.expr = parse_expr();
          }
          inst.params.push_back(std::move(c));
        } while (accept_op(","));
      }
      expect_op(")");
    }
    inst.instance_name = expect_ident();
    if (is_op("[")) throw CompileError(peek().loc, "unsupported construct: instance array");
    expect_op("(");
    if (!is_op(")")) {
      do {
        ast::Connection c;
        c.loc = peek().loc;
        if (!accept_op("."))
          throw CompileError(c.loc, "unsupported construct: positional port connection (use .port(expr))");
        c.name = expect_ident();
        expect_op("(");
        if (!is_op(")")) c.expr = parse_expr();
        expect_op(")");
        inst.ports.push_back(std::move(c));
      } while (accept_op(","));
    }
    expect_op(")");
    expect_op(";");
    return inst;
  }

  // ---- statements -----------------------------------------------------
  ast::ExprPtr parse_delay_value() {
    if (accept_op("(")) {
      auto e = parse_expr();
      expect_op(")");
      return e;
    }
    const Token& t = peek();
    if (t.kind == Tok::Number) return parse_primary();
    if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Ident, t.loc);
      e->name = expect_ident();
      return e;
    }
    fail_unexpected("delay value");
  }

  ast::StmtPtr parse_stmt() {
    SourceLoc loc = peek().loc;
    if (accept_op(";")) return std::make_unique<ast::Stmt>(ast::StmtKind::Null, loc);
    if (accept_kw("begin")) {
      auto s = std::make_unique<ast::Stmt>(ast::StmtKind::Block, loc);
      if (accept_op(":")) throw CompileError(peek().loc, "unsupported construct: named block");
      while (!accept_kw("end")) {
        if (at_end()) fail_unexpected("'end'");
        s->stmts.push_back(parse_stmt());
      }
      return s;
    }
    if (accept_kw("if")) {
      auto s = std::make_unique<ast::Stmt>(ast::StmtKind::If, loc);
      expect_op("(");
      s->expr = parse_expr();
      expect_op(")");
      s->then_stmt = parse_stmt();
      if (accept_kw("else")) s->else_stmt = parse_stmt();
      return s;
    }
    if (accept_kw("case")) {
      auto s = std::make_unique<ast::Stmt>(ast::StmtKind::Case, loc);
      expect_op("(");
      s->expr = parse_expr();
      expect_op(")");
      bool seen_default = false;
      while (!accept_kw("endcase")) {
        if (at_end()) fail_unexpected("'endcase'");
        ast::CaseItem item;
        item.loc = peek().loc;
        if (accept_kw("default")) {
          if (seen_default) throw CompileError(item.loc, "duplicate default in case");
          seen_default = true;
          accept_op(":");
        } else {
          do {
            item.labels.push_back(parse_expr());
          } while (accept_op(","));
          expect_op(":");
        }
        item.body = parse_stmt();
        s->items.push_back(std::move(item));
      }
      return s;
    }
    if (accept_op("#")) {
      auto s = std::make_unique<ast::Stmt>(ast::StmtKind::Delay, loc);
      s->expr = parse_delay_value();
      s->then_stmt = parse_stmt();
      return s;
    }
    if (is_op("@")) throw CompileError(loc, "unsupported construct: event control inside procedural statement");
    if (is_kw("assign")) throw CompileError(loc, "unsupported construct: procedural continuous assignment");
    const Token& t = peek();
    if (t.kind == Tok::SysIdent)
      throw CompileError(t.loc, "unsupported construct: system task or function '" + t.text + "'");
    if (t.kind == Tok::Ident && kUnsupported.count(t.text))
      throw CompileError(t.loc, "unsupported construct: '" + t.text + "'");
    auto lhs = parse_lvalue();
    std::unique_ptr<ast::Stmt> s;
    if (accept_op("=")) {
      s = std::make_unique<ast::Stmt>(ast::StmtKind::Blocking, loc);
    } else if (accept_op("<=")) {
      s = std::make_unique<ast::Stmt>(ast::StmtKind::Nonblocking, loc);
    } else {
      fail_unexpected("'=' or '<='");
    }
    if (is_op("#") || is_op("@")) throw CompileError(peek().loc, "unsupported construct: intra-assignment timing control");
    s->lhs = std::move(lhs);
    s->expr = parse_expr();
    expect_op(";");
    return s;
  }

  ast::ExprPtr parse_lvalue() {
    SourceLoc loc = peek().loc;
    if (accept_op("{")) {
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Concat, loc);
      do {
        e->args.push_back(parse_lvalue());
      } while (accept_op(","));
      expect_op("}");
      return e;
    }
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text) || kUnsupported.count(peek().text))
      fail_unexpected("assignment target");
    return parse_name_ref();
  }

  // ---- expressions ----------------------------------------------------
  ast::ExprPtr make_binary(std::string op, ast::ExprPtr a, ast::ExprPtr b, SourceLoc loc) {
    auto e = std::make_unique<ast::Expr>(ast::ExprKind::Binary, std::move(loc));
    e->name = std::move(op);
    e->args.push_back(std::move(a));
    e->args.push_back(std::move(b));
    return e;
  }

  ast::ExprPtr parse_expr() {
    auto c = parse_binary(0);
    if (is_op("?")) {
      SourceLoc loc = peek().loc;
      next();
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Ternary, loc);
      e->args.push_back(std::move(c));
      e->args.push_back(parse_expr());
      expect_op(":");
      e->args.push_back(parse_expr());
      return e;
    }
    return c;
  }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^" || op == "~^" || op == "^~") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return -1;
  }

  ast::ExprPtr parse_binary(int min_prec) {
    auto lhs = parse_unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind != Tok::Op) break;
      if (t.text == "===" || t.text == "!==" || t.text == "<<<" || t.text == ">>>" || t.text == "**")
        throw CompileError(t.loc, "unsupported construct: operator '" + t.text + "'");
      int p = precedence(t.text);
      if (p < 0 || p < min_prec) break;
      std::string op = t.text;
      SourceLoc loc = t.loc;
      next();
      auto rhs = parse_binary(p + 1);
      lhs = make_binary(op, std::move(lhs), std::move(rhs), loc);
    }
    return lhs;
  }

  ast::ExprPtr parse_unary() {
    const Token& t = peek();
    if (t.kind == Tok::Op &&
        (t.text == "~" || t.text == "!" || t.text == "-" || t.text == "+" || t.text == "&" || t.text == "|" ||
         t.text == "^" || t.text == "~&" || t.text == "~|" || t.text == "~^" || t.text == "^~")) {
      SourceLoc loc = t.loc;
      std::string op = t.text;
      next();
      auto operand = parse_unary();
      if (op == "+") return operand;
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Unary, loc);
      e->name = op == "^~" ? "~^" : op;
      e->args.push_back(std::move(operand));
      return e;
    }
    return parse_primary();
  }

  ast::ExprPtr parse_name_ref() {
    SourceLoc loc = peek().loc;
    std::string name = expect_ident();
    if (is_op(".")) throw CompileError(peek().loc, "unsupported construct: hierarchical reference");
    if (!accept_op("[")) {
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Ident, loc);
      e->name = std::move(name);
      return e;
    }
    auto first = parse_expr();
    if (is_op("+:") || is_op("-:")) throw CompileError(peek().loc, "unsupported construct: indexed part-select");
    if (accept_op(":")) {
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::PartSelect, loc);
      e->name = std::move(name);
      e->args.push_back(std::move(first));
      e->args.push_back(parse_expr());
      expect_op("]");
      return e;
    }
    expect_op("]");
    if (is_op("[")) throw CompileError(peek().loc, "unsupported construct: multi-dimensional select");
    auto e = std::make_unique<ast::Expr>(ast::ExprKind::BitSelect, loc);
    e->name = std::move(name);
    e->args.push_back(std::move(first));
    return e;
  }

  ast::ExprPtr parse_primary() {
    const Token& t = peek();
    SourceLoc loc = t.loc;
    if (t.kind == Tok::Number) {
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Number, loc);
      e->literal = t.value;
      e->sized = t.sized;
      next();
      return e;
    }
    if (t.kind == Tok::SysIdent)
      throw CompileError(loc, "unsupported construct: system task or function '" + t.text + "'");
    if (accept_op("(")) {
      auto e = parse_expr();
      expect_op(")");
      return e;
    }
    if (accept_op("{")) {
      auto first = parse_expr();
      if (accept_op("{")) {
        auto e = std::make_unique<ast::Expr>(ast::ExprKind::Replicate, loc);
        e->args.push_back(std::move(first));
        auto inner = std::make_unique<ast::Expr>(ast::ExprKind::Concat, peek().loc);
        do {
          inner->args.push_back(parse_expr());
        } while (accept_op(","));
        expect_op("}");
        expect_op("}");
        e->args.push_back(std::move(inner));
        return e;
      }
      auto e = std::make_unique<ast::Expr>(ast::ExprKind::Concat, loc);
      e->args.push_back(std::move(first));
      while (accept_op(",")) e->args.push_back(parse_expr());
      expect_op("}");
      return e;
    }
    if (t.kind == Tok::Ident && !kKeywords.count(t.text) && !kUnsupported.count(t.text)) {
      if (is_op("(", 1)) throw CompileError(loc, "unsupported construct: function call '" + t.text + "'");
      return parse_name_ref();
    }
    fail_unexpected("expression");
  }

public:
  static ast::ExprPtr clone_expr(const ast::Expr& e) {
    auto c = std::make_unique<ast::Expr>(e.kind, e.loc);
    c->name = e.name;
    c->literal = e.literal;
    c->sized = e.sized;
    for (const auto& a : e.args) c->args.push_back(clone_expr(*a));
    return c;
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

std::optional<ast::Range> Parser::clone_range(const std::optional<ast::Range>& r) {
  if (!r) return std::nullopt;
  ast::Range c;
  c.msb = clone_expr(*r->msb);
  c.lsb = clone_expr(*r->lsb);
  return c;
}

// ---- name resolution ----------------------------------------------------

struct Scope {
  std::set<std::string> nets;
  std::set<std::string> params;
};

void check_expr(const ast::Expr& e, const Scope& s, bool const_only) {
  switch (e.kind) {
    case ast::ExprKind::Ident:
    case ast::ExprKind::BitSelect:
    case ast::ExprKind::PartSelect:
      if (s.params.count(e.name)) {
        if (e.kind != ast::ExprKind::Ident) throw CompileError(e.loc, "cannot select bits of parameter '" + e.name + "'");
      } else if (!s.nets.count(e.name) || const_only) {
        if (const_only && s.nets.count(e.name))
          throw CompileError(e.loc, "'" + e.name + "' is not a constant");
        throw CompileError(e.loc, "undeclared identifier '" + e.name + "'");
      }
      break;
    default:
      break;
  }
  for (const auto& a : e.args) check_expr(*a, s, const_only);
}

void check_stmt(const ast::Stmt& st, const Scope& s) {
  if (st.lhs) check_expr(*st.lhs, s, false);
  if (st.expr) check_expr(*st.expr, s, st.kind == ast::StmtKind::Delay);
  if (st.then_stmt) check_stmt(*st.then_stmt, s);
  if (st.else_stmt) check_stmt(*st.else_stmt, s);
  for (const auto& c : st.stmts) check_stmt(*c, s);
  for (const auto& item : st.items) {
    for (const auto& l : item.labels) check_expr(*l, s, false);
    check_stmt(*item.body, s);
  }
}

void resolve_module(const ast::Module& m) {
  Scope s;
  std::set<std::string> declared_ports;
  auto declare = [&](const std::string& name, const SourceLoc& loc, bool is_net) {
    if (s.params.count(name) || (is_net && s.nets.count(name)))
      throw CompileError(loc, "duplicate declaration of '" + name + "'");
    (is_net ? s.nets : s.params).insert(name);
  };
  for (const auto& p : m.params) {
    // Parameters may reference earlier parameters only.
    check_expr(*p.value, s, true);
    declare(p.name, p.loc, false);
  }
  for (const auto& p : m.ports) {
    if (declared_ports.count(p.name)) throw CompileError(p.loc, "duplicate port declaration '" + p.name + "'");
    declared_ports.insert(p.name);
    declare(p.name, p.loc, true);
  }
  for (const auto& n : m.nets) {
    if (declared_ports.count(n.name)) {
      // `output q; reg q;` re-declares the port's type.
      continue;
    }
    declare(n.name, n.loc, true);
  }
  for (const auto& name : m.port_order)
    if (!declared_ports.count(name)) throw CompileError(m.loc, "port '" + name + "' has no direction declaration");
  for (const auto& p : m.ports) {
    bool listed = false;
    for (const auto& name : m.port_order) listed |= name == p.name;
    if (!listed) throw CompileError(p.loc, "'" + p.name + "' is declared as a port but not in the port list");
    if (p.range) {
      check_expr(*p.range->msb, s, true);
      check_expr(*p.range->lsb, s, true);
    }
  }
  for (const auto& n : m.nets) {
    if (n.range) {
      check_expr(*n.range->msb, s, true);
      check_expr(*n.range->lsb, s, true);
    }
    if (n.init) check_expr(*n.init, s, false);
  }
  for (const auto& a : m.assigns) {
    if (a.delay) check_expr(*a.delay, s, true);
    check_expr(*a.lhs, s, false);
    check_expr(*a.rhs, s, false);
  }
  for (const auto& b : m.procs) {
    for (const auto& si : b.sensitivity) check_expr(*si.signal, s, false);
    check_stmt(*b.body, s);
  }
  for (const auto& inst : m.instances) {
    for (const auto& c : inst.params) check_expr(*c.expr, s, true);
    for (const auto& c : inst.ports)
      if (c.expr) check_expr(*c.expr, s, false);
  }
}

}  // namespace

ast::Ast parse(const SourceUnit& source) {
  ast::Ast out;
  for (const auto& f : source.files) {
    Lexer lex(f.text, f.path);
    Parser p(lex.run());
    p.parse_into(out);
  }
  std::set<std::string> names;
  for (const auto& m : out.modules) {
    if (!names.insert(m.name).second) throw CompileError(m.loc, "duplicate module '" + m.name + "'");
    resolve_module(m);
  }
  if (!source.top_module_name.empty() && !out.find(source.top_module_name))
    throw CompileError(SourceLoc{}, "top module '" + source.top_module_name + "' is not defined");
  return out;
}

ast::Ast parse_text(std::string_view text, const std::string& path) {
  SourceUnit unit;
  unit.files.push_back({path, std::string(text)});
  return parse(unit);
}

// ---- dump ----------------------------------------------------------------

namespace {

std::string lit(const ast::Expr& e) { return (e.sized ? "" : "u") + e.literal.to_string(); }

void dump_stmt(std::ostringstream& os, const ast::Stmt& s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case ast::StmtKind::Null: os << pad << "null\n"; break;
    case ast::StmtKind::Blocking:
      os << pad << "blocking " << dump_expr(*s.lhs) << " = " << dump_expr(*s.expr) << "\n";
      break;
    case ast::StmtKind::Nonblocking:
      os << pad << "nonblocking " << dump_expr(*s.lhs) << " <= " << dump_expr(*s.expr) << "\n";
      break;
    case ast::StmtKind::Block:
      os << pad << "begin\n";
      for (const auto& c : s.stmts) dump_stmt(os, *c, indent + 1);
      os << pad << "end\n";
      break;
    case ast::StmtKind::If:
      os << pad << "if " << dump_expr(*s.expr) << "\n";
      dump_stmt(os, *s.then_stmt, indent + 1);
      if (s.else_stmt) {
        os << pad << "else\n";
        dump_stmt(os, *s.else_stmt, indent + 1);
      }
      break;
    case ast::StmtKind::Case:
      os << pad << "case " << dump_expr(*s.expr) << "\n";
      for (const auto& item : s.items) {
        if (item.labels.empty()) {
          os << pad << "  default\n";
        } else {
          os << pad << "  item";
          for (const auto& l : item.labels) os << " " << dump_expr(*l);
          os << "\n";
        }
        dump_stmt(os, *item.body, indent + 2);
      }
      break;
    case ast::StmtKind::Delay:
      os << pad << "delay " << dump_expr(*s.expr) << "\n";
      dump_stmt(os, *s.then_stmt, indent + 1);
      break;
  }
}

std::string dump_range(const std::optional<ast::Range>& r) {
  if (!r) return "";
  return " [" + dump_expr(*r->msb) + ":" + dump_expr(*r->lsb) + "]";
}

}  // namespace

std::string dump_expr(const ast::Expr& e) {
  switch (e.kind) {
    case ast::ExprKind::Ident: return e.name;
    case ast::ExprKind::Number: return lit(e);
    case ast::ExprKind::Unary: return "(" + e.name + " " + dump_expr(*e.args[0]) + ")";
    case ast::ExprKind::Binary:
      return "(" + e.name + " " + dump_expr(*e.args[0]) + " " + dump_expr(*e.args[1]) + ")";
    case ast::ExprKind::Ternary:
      return "(?: " + dump_expr(*e.args[0]) + " " + dump_expr(*e.args[1]) + " " + dump_expr(*e.args[2]) + ")";
    case ast::ExprKind::Concat: {
      std::string s = "{";
      for (size_t i = 0; i < e.args.size(); ++i) s += (i ? " " : "") + dump_expr(*e.args[i]);
      return s + "}";
    }
    case ast::ExprKind::Replicate: return "{" + dump_expr(*e.args[0]) + " " + dump_expr(*e.args[1]) + "}";
    case ast::ExprKind::BitSelect: return e.name + "[" + dump_expr(*e.args[0]) + "]";
    case ast::ExprKind::PartSelect:
      return e.name + "[" + dump_expr(*e.args[0]) + ":" + dump_expr(*e.args[1]) + "]";
  }
  return "?";
}

std::string dump_ast(const ast::Ast& tree) {
  std::ostringstream os;
  for (const auto& m : tree.modules) {
    os << "module " << m.name << " (";
    for (size_t i = 0; i < m.port_order.size(); ++i) os << (i ? " " : "") << m.port_order[i];
    os << ")\n";
    for (const auto& p : m.params)
      os << "  " << (p.local ? "localparam " : "parameter ") << p.name << " = " << dump_expr(*p.value) << "\n";
    for (const auto& p : m.ports) {
      const char* dir = p.dir == ast::PortDir::Input ? "input" : p.dir == ast::PortDir::Output ? "output" : "inout";
      os << "  port " << dir << (p.is_reg ? " reg" : "") << dump_range(p.range) << " " << p.name << "\n";
    }
    for (const auto& n : m.nets) {
      os << "  " << (n.type == ast::NetType::Wire ? "wire" : "reg") << dump_range(n.range) << " " << n.name;
      if (n.init) os << " = " << dump_expr(*n.init);
      os << "\n";
    }
    for (const auto& a : m.assigns) {
      os << "  assign";
      if (a.delay) os << " #" << dump_expr(*a.delay);
      os << " " << dump_expr(*a.lhs) << " = " << dump_expr(*a.rhs) << "\n";
    }
    for (const auto& b : m.procs) {
      os << "  " << (b.kind == ast::ProcKind::Initial ? "initial" : "always");
      if (b.star) {
        os << " @(*)";
      } else if (b.has_event_control) {
        os << " @(";
        for (size_t i = 0; i < b.sensitivity.size(); ++i) {
          const auto& s = b.sensitivity[i];
          os << (i ? " or " : "")
             << (s.edge == ast::EdgeKind::Posedge   ? "posedge "
                 : s.edge == ast::EdgeKind::Negedge ? "negedge "
                                                    : "")
             << dump_expr(*s.signal);
        }
        os << ")";
      }
      os << "\n";
      dump_stmt(os, *b.body, 2);
    }
    for (const auto& inst : m.instances) {
      os << "  instance " << inst.module_name << " " << inst.instance_name;
      if (!inst.params.empty()) {
        os << " #(";
        for (size_t i = 0; i < inst.params.size(); ++i) {
          const auto& c = inst.params[i];
          os << (i ? " " : "") << (c.name.empty() ? "" : "." + c.name + "=") << dump_expr(*c.expr);
        }
        os << ")";
      }
      os << "\n";
      for (const auto& c : inst.ports) os << "    ." << c.name << "(" << (c.expr ? dump_expr(*c.expr) : "") << ")\n";
    }
    os << "endmodule\n";
  }
  return os.str();
}

}  // namespace rtlfsim
