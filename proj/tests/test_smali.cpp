#include "nopcode/smali.hpp"

#include "doctest.h"
#include "nopcode/errors.hpp"
#include "test_helpers.hpp"

using namespace nopcode;

namespace {
const OpcodeTable& table() { return load_opcode_table(); }
}  // namespace

TEST_CASE("method body parses mnemonics and skips scaffolding") {
  std::string text =
      ".method public onCreate(Landroid/os/Bundle;)V\n"
      "    .registers 3\n"
      "    .param p1, \"savedInstanceState\"\n"
      "\n"
      "    # prologue comment\n"
      "    :goto_0\n"
      "    invoke-virtual {p0}, Lcom/a/B;->c()V\n"
      "    const/4 v0, 0x1\n"
      "    if-eqz v0, :cond_1\n"
      "    return-void\n"
      "    :cond_1\n"
      "    goto :goto_0\n"
      ".end method\n";
  OpcodeSeq seq = parse_smali_method(text, table());
  CHECK(seq.method_sig == "onCreate(Landroid/os/Bundle;)V");
  CHECK(seq.opcodes == std::vector<std::uint8_t>{0x6e, 0x12, 0x38, 0x0e, 0x28});
}

TEST_CASE("payload blocks inside a method contribute nothing") {
  std::string text =
      ".method static f()V\n"
      "    .registers 2\n"
      "    packed-switch v0, :pswitch_data_0\n"
      "    return-void\n"
      "    .packed-switch 0x1\n"
      "        :pswitch_0\n"
      "        :pswitch_1\n"
      "    .end packed-switch\n"
      "    .array-data 4\n"
      "        0x6e\n"
      "        0x0e\n"
      "    .end array-data\n"
      ".end method\n";
  OpcodeSeq seq = parse_smali_method(text, table());
  // packed-switch (0x2b), return-void; the payload contents never count.
  CHECK(seq.opcodes == std::vector<std::uint8_t>{0x2b, 0x0e});
}

TEST_CASE("annotations and .end local do not derail parsing") {
  std::string text =
      ".method public g()I\n"
      "    .registers 1\n"
      "    .annotation runtime Ljava/lang/Deprecated;\n"
      "        value = \"const/4 v0, 0x0\"\n"
      "    .end annotation\n"
      "    .local v0, \"x\":I\n"
      "    const/4 v0, 0x0\n"
      "    .end local v0\n"
      "    return v0\n"
      ".end method\n";
  OpcodeSeq seq = parse_smali_method(text, table());
  CHECK(seq.opcodes == std::vector<std::uint8_t>{0x12, 0x0f});
}

TEST_CASE("unknown mnemonic reports file, line, and token") {
  std::string text =
      ".class public La/B;\n"
      ".method public h()V\n"
      "    bogus-op v0\n"
      ".end method\n";
  try {
    parse_smali_class(text, "La/B.smali", table());
    FAIL("expected UnknownMnemonicError");
  } catch (const UnknownMnemonicError& e) {
    CHECK(e.file() == "La/B.smali");
    CHECK(e.line() == 3);
    CHECK(e.token() == "bogus-op");
  }
}

TEST_CASE("class parse extracts every method with the class name") {
  std::string text =
      "# header comment\n"
      ".class public final Lcom/x/Y;\n"
      ".super Ljava/lang/Object;\n"
      "\n"
      ".field private a:I\n"
      "\n"
      ".method public constructor <init>()V\n"
      "    .registers 1\n"
      "    invoke-direct {p0}, Ljava/lang/Object;-><init>()V\n"
      "    return-void\n"
      ".end method\n"
      "\n"
      ".method public abstract i()V\n"
      ".end method\n";
  auto methods = parse_smali_class(text, "Y.smali", table());
  REQUIRE(methods.size() == 2);
  CHECK(methods[0].class_name == "Lcom/x/Y;");
  CHECK(methods[0].method_sig == "<init>()V");
  CHECK(methods[0].opcodes == std::vector<std::uint8_t>{0x70, 0x0e});
  CHECK(methods[1].method_sig == "i()V");
  CHECK(methods[1].opcodes.empty());
}

TEST_CASE("tree parse sorts methods by class and validates") {
  TempDir dir;
  std::filesystem::create_directories(dir / "sub");
  write_text_file(dir / "b.smali",
                  ".class Lb/B;\n.method m()V\n    return-void\n.end method\n");
  write_text_file(dir.path / "sub" / "a.smali",
                  ".class La/A;\n.method m()V\n    nop\n    return-void\n.end method\n");
  write_text_file(dir / "notes.txt", "not smali\n");

  AppRecord app = parse_smali_tree(dir.path, "app1", table());
  CHECK(app.app_id == "app1");
  REQUIRE(app.methods.size() == 2);
  CHECK(app.methods[0].class_name == "La/A;");
  CHECK(app.methods[1].class_name == "Lb/B;");
  validate_app_record(app, table());
}

TEST_CASE("validate_app_record rejects bad records") {
  AppRecord app;
  app.app_id = "ok";
  OpcodeSeq m;
  m.class_name = "La;";
  m.method_sig = "m()V";
  m.opcodes = {0x0e};
  app.methods.push_back(m);
  validate_app_record(app, table());

  AppRecord bad_id = app;
  bad_id.app_id = "has\ttab";
  CHECK_THROWS_AS(validate_app_record(bad_id, table()), InputError);

  AppRecord empty_id = app;
  empty_id.app_id = "";
  CHECK_THROWS_AS(validate_app_record(empty_id, table()), InputError);

  AppRecord bad_byte = app;
  bad_byte.methods[0].opcodes = {0x3e};  // undefined gap
  CHECK_THROWS_AS(validate_app_record(bad_byte, table()), InputError);

  AppRecord unsorted = app;
  OpcodeSeq first;
  first.class_name = "Lz/Z;";
  first.method_sig = "m()V";
  unsorted.methods.insert(unsorted.methods.begin(), first);
  CHECK_THROWS_AS(validate_app_record(unsorted, table()), InputError);
}
