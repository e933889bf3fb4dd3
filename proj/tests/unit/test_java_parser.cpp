#include "doctest.h"

#include <string>

#include "robgen/java/parser.hpp"

using namespace robgen::java;

namespace {

const Node* find_first(const Node& root, NodeKind kind) {
  const Node* found = nullptr;
  walk(root, [&](const Node& n) {
    if (found) return false;
    if (n.kind == kind) {
      found = &n;
      return false;
    }
    return true;
  });
  return found;
}

std::string render_first(const SyntaxTree& tree, NodeKind kind) {
  const Node* n = find_first(tree.root(), kind);
  REQUIRE(n != nullptr);
  return tree.render(*n);
}

}  // namespace

TEST_CASE("minimal method parses cleanly") {
  SyntaxTree t = parse_source("void f(){}");
  CHECK(t.ok());
  CHECK(count_kind(t.root(), NodeKind::MethodDecl) == 1);
  CHECK(count_kind(t.root(), NodeKind::Error) == 0);
}

TEST_CASE("truncated if condition is reported but the tree survives") {
  SyntaxTree t = parse_source("void f(){ if(x");
  REQUIRE_FALSE(t.ok());
  CHECK(t.errors().front().line == 1);
  CHECK(count_kind(t.root(), NodeKind::Error) >= 1);
  CHECK(count_kind(t.root(), NodeKind::MethodDecl) == 1);
}

TEST_CASE("generics, casts and lambdas") {
  SyntaxTree t = parse_source(R"(
public static <T extends Comparable<T>> Map<String, List<Integer>> build(final List<? extends T> items, int... xs) throws IOException {
  Map<String, List<Integer>> out = new HashMap<>();
  int shifted = xs[0] >>> 2;
  shifted >>= 1;
  boolean b = xs.length >= 2 && (Object) items instanceof List<?> l && l.size() > 0;
  items.forEach(x -> System.out.println(x));
  Runnable r = () -> { return; };
  String s = (String) map.get("k");
  for (final String k : out.keySet()) { continue; }
  for (int i = 0, j = 10; i < j; i++, j--) {}
  int[] arr = {1, 2, 3};
  Object o = new Object() { public String toString() { return "x"; } };
  var v = switch (shifted) { case 1, 2 -> "a"; default -> { yield "b"; } };
  try (InputStream in = open(); OutputStream os = out2) { in.read(); } catch (IOException | RuntimeException e) { throw e; } finally { done(); }
  label: while (true) { break label; }
  do { shifted--; } while (shifted > 0);
  assert shifted == 0 : "must be zero";
  return out;
})");
  for (const auto& e : t.errors()) MESSAGE(e.line << ":" << e.column << " " << e.message);
  CHECK(t.ok());
  CHECK(count_kind(t.root(), NodeKind::MethodDecl) == 2);  // plus the anonymous toString
  CHECK(count_kind(t.root(), NodeKind::Lambda) == 2);
  CHECK(count_kind(t.root(), NodeKind::Cast) == 2);
  CHECK(count_kind(t.root(), NodeKind::Try) == 1);
  CHECK(count_kind(t.root(), NodeKind::ForEach) == 1);
  CHECK(count_kind(t.root(), NodeKind::InstanceOf) == 1);
}

TEST_CASE("canonical rendering ignores source whitespace") {
  SyntaxTree a = parse_expression("a!=null&&a.length>0");
  SyntaxTree b = parse_expression("a  !=  null\n   && a . length > 0");
  CHECK(a.ok());
  CHECK(a.render(a.root()) == "a != null && a.length > 0");
  CHECK(b.render(b.root()) == "a != null && a.length > 0");
  SyntaxTree c = parse_expression("!isValid() || -x >= y[i]++ || (String)o == s");
  CHECK(c.render(c.root()) == "!isValid() || -x >= y[i]++ || (String) o == s");
  SyntaxTree d = parse_expression("x>>>2>>1");
  CHECK(d.render(d.root()) == "x >>> 2 >> 1");
  SyntaxTree e = parse_expression("new ArrayList<String>(n).isEmpty()");
  CHECK(e.render(e.root()) == "new ArrayList<String>(n).isEmpty()");
}

TEST_CASE("class wrapper and fields") {
  SyntaxTree t = parse_source(R"(
package a.b;
import java.util.*;
@SuppressWarnings("unchecked")
public class Foo<T> extends Bar implements Baz {
  private static final int MAX = 10;
  enum Color { RED, GREEN(1) { }, BLUE; int v; }
  record Point(int x, int y) {}
  public Foo(int x) { super(x); this.x = x; }
  @Override public String toString() { return "Foo"; }
  abstract void g();
}
)");
  for (const auto& e : t.errors()) MESSAGE(e.line << ":" << e.column << " " << e.message);
  CHECK(t.ok());
  CHECK(count_kind(t.root(), NodeKind::MethodDecl) == 3);
}

TEST_CASE("ternary and conditions render") {
  SyntaxTree t = parse_source("int f(int x){ return x > 5 ? x : -x; }");
  CHECK(t.ok());
  CHECK(render_first(t, NodeKind::Conditional) == "x > 5 ? x : -x");
}

TEST_CASE("prose mixed with code never crashes") {
  SyntaxTree t = parse_source("Here's the method you asked for:\n```java\nint f() { return 1; }\n```\n");
  CHECK_FALSE(t.ok());
  CHECK(count_kind(t.root(), NodeKind::MethodDecl) >= 1);
}

TEST_CASE("deep nesting is bounded") {
  std::string s = "void f(){ x = ";
  for (int i = 0; i < 5000; ++i) s += "(";
  s += "1";
  SyntaxTree t = parse_source(s);
  CHECK_FALSE(t.ok());
}
