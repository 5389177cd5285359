#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "polarfloer/cli.hpp"
#include "support/generators.hpp"

using namespace polarfloer;

namespace {

const std::string kData = POLARFLOER_DATA_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string temp_file(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / ("polarfloer_test_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

CommandArgs args_for(const std::string& target) {
  CommandArgs a;
  a.target = target;
  return a;
}

std::string round_trip(const Dataset& ds) { return emit_dataset(parse_dataset_text(emit_dataset(ds))); }

Json machine_part(const std::string& text) {
  auto at = text.find("\n---\n");
  REQUIRE(at != std::string::npos);
  return Json::parse(text.substr(at + 5));
}

std::string schema_message(const std::string& text) {
  try {
    parse_dataset_text(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

const char* kBadDangling = R"({
  "version": 1,
  "kind": "z2complex",
  "generators": [{"label": "a", "degree": 0}, {"label": "b", "degree": 1}],
  "differential": [["ghost", "a", "1+i"]]
})";

}  // namespace

TEST_CASE("shipped canonical file", "[cli]") {
  std::string text = slurp(kData + "/canonical_trn2.json");
  Dataset ds = parse_dataset(kData + "/canonical_trn2.json");
  REQUIRE(ds.kind() == "km");
  const auto& k = std::get<KMDataset>(ds.body);
  CHECK(k.o.size() == 2);
  CHECK(k.lifted);
  CHECK(validate_relations(k).ok());
  CHECK(emit_dataset(Dataset{{}, canonical_trn_dataset(2)}) == text);
  CHECK(emit_dataset(ds) == text);
}

TEST_CASE("shipped files are canonical", "[cli]") {
  for (const auto& entry : std::filesystem::directory_iterator(kData)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().filename().string());
    std::string text = slurp(entry.path().string());
    CHECK(emit_dataset(parse_dataset(entry.path().string())) == text);
  }
}

TEST_CASE("round trip on generated datasets", "[cli][property]") {
  gen::Rng rng(71);
  for (int trial = 0; trial < 15; ++trial) {
    Dataset z{{}, complex_data(gen::random_finite_type(rng, 10))};
    std::string zt = emit_dataset(z);
    CHECK(round_trip(z) == zt);
    Dataset back = parse_dataset_text(zt);
    CHECK(homology(a_f2(std::get<Z2ComplexData>(back.body).complex()).c).free_rank ==
          homology(a_f2(std::get<Z2ComplexData>(z.body).complex()).c).free_rank);

    Dataset f{{}, floer_data(gen::random_f2_complex(rng, gen::uniform(rng, 0, 7)))};
    CHECK(round_trip(f) == emit_dataset(f));

    KMDataset k = gen::random_km(rng, 16);
    Dataset kd{{}, k};
    CHECK(round_trip(kd) == emit_dataset(kd));
    KMDataset kb = std::get<KMDataset>(parse_dataset_text(emit_dataset(kd)).body);
    CHECK(validate_relations(kb).ok());
    CHECK(km_homology(assemble(kb)).dim_check == km_homology(assemble(k)).dim_check);

    TwistedDataset tw = gen::random_twisted(rng);
    Dataset td{{}, TwistedData{tw, std::nullopt}};
    CHECK(round_trip(td) == emit_dataset(td));
    TwistedDataset tb = std::get<TwistedData>(parse_dataset_text(emit_dataset(td)).body).dataset;
    CHECK(twisted_homology(build_twisted(tb)) == twisted_homology(build_twisted(tw)));

    EquivariantDataset e = gen::random_equivariant(rng, 8);
    Dataset ed{{}, e};
    CHECK(round_trip(ed) == emit_dataset(ed));
    EquivariantDataset eb = std::get<EquivariantDataset>(parse_dataset_text(emit_dataset(ed)).body);
    CHECK(eb.window == e.window);
    CHECK(eb.interior.size() == e.interior.size());
  }
}

TEST_CASE("ring elements are normalized", "[cli]") {
  const char* text = R"({"version": 1, "kind": "z2complex",
    "generators": [{"label": "b", "degree": 1}, {"label": "a", "degree": 0}],
    "differential": [["b", "a", "i + 1"]]})";
  std::string out = emit_dataset(parse_dataset_text(text));
  CHECK(out.find("\"1+i\"") != std::string::npos);
  CHECK(out.find("{\"degree\": 0, \"label\": \"a\"}") < out.find("{\"degree\": 1, \"label\": \"b\"}"));
  CHECK(emit_dataset(parse_dataset_text(out)) == out);

  const char* tw = R"({"version": 1, "kind": "twisted", "points": [{"label": "p", "index": 0}],
    "porteous": {"total_sw": "t^3 + 1 + t^3 + t", "n": 2}})";
  CHECK(emit_dataset(parse_dataset_text(tw)).find("\"total_sw\": \"t^0+t^1\"") != std::string::npos);
}

TEST_CASE("empty generator list is a valid dataset", "[cli]") {
  Dataset ds = parse_dataset_text(R"({"version": 1, "kind": "z2complex", "generators": []})");
  const auto& z = std::get<Z2ComplexData>(ds.body);
  CHECK(z.labels.empty());
  CHECK(z.complex().size() == 0);
  Report rep = run_command("homology", {}, ds);
  CHECK(rep.exit_code == kExitOk);
  Dataset km = parse_dataset_text(R"({"version": 1, "kind": "km", "o": [], "s": [], "u": []})");
  CHECK(run_command("km", {}, km).exit_code == kExitOk);
}

TEST_CASE("schema errors name the field", "[cli]") {
  std::string dangling = schema_message(kBadDangling);
  CHECK_THAT(dangling, Catch::Matchers::ContainsSubstring("'ghost'"));
  CHECK_THAT(dangling, Catch::Matchers::ContainsSubstring("/differential/0/0"));

  CHECK_THAT(schema_message(R"({"version": 1, "kind": "z2complex",
    "generators": [{"label": "a"}, {"label": "a"}]})"),
             Catch::Matchers::ContainsSubstring("duplicate label 'a'"));
  CHECK_THAT(schema_message(R"({"version": 2, "kind": "km"})"),
             Catch::Matchers::ContainsSubstring("unsupported format version"));
  CHECK_THAT(schema_message(R"({"version": 1, "kind": "torus"})"),
             Catch::Matchers::ContainsSubstring("unknown dataset kind"));
  CHECK_THAT(schema_message(R"({"version": 1, "kind": "km", "o": [{"label": "a"}],
    "counts": {"d_oo": [["a", "a", "i"]]}})"),
             Catch::Matchers::ContainsSubstring("/counts/d_oo/0/2"));
  CHECK_THAT(schema_message(R"({"version": 1, "kind": "twisted",
    "points": [{"label": "p", "index": "zero"}]})"),
             Catch::Matchers::ContainsSubstring("/points/0/index: expected an integer"));
  CHECK_THAT(schema_message(R"({"version": 1, "kind": "twisted", "pionts": []})"),
             Catch::Matchers::ContainsSubstring("unknown field 'pionts'"));
  CHECK_THAT(schema_message(R"({"version": 1, "kind": "equivariant",
    "pairs": [{"label": "y"}], "interior": [{"kind": "os", "source": "y", "target": "y", "mu": 1}]})"),
             Catch::Matchers::ContainsSubstring("unknown invariant point label 'y'"));
  CHECK_THAT(schema_message("{\"version\": 1,\n\"kind\": }"), Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THAT(schema_message(R"({"version": 1, "kind": "floer",
    "generators": [{"label": "a", "degree": 0}, {"label": "b"}]})"),
             Catch::Matchers::ContainsSubstring("every generator has a degree"));
}

TEST_CASE("exit codes", "[cli]") {
  CommandArgs bad = args_for(kData + "/bad_relations.json");
  Report v = run_cli("validate", bad);
  CHECK(v.exit_code == kExitValidation);
  CHECK_THAT(v.human, Catch::Matchers::ContainsSubstring("nonzero matrix"));
  CHECK_THAT(v.human, Catch::Matchers::ContainsSubstring("[1, 0, 0]"));

  Report s = run_cli("validate", args_for(temp_file("dangling.json", kBadDangling)));
  CHECK(s.exit_code == kExitSchema);
  CHECK_THAT(s.human, Catch::Matchers::ContainsSubstring("ghost"));

  CHECK(run_cli("frobnicate", bad).exit_code == kExitSchema);
  CHECK(run_cli("steenrod", bad).exit_code == kExitSchema);
  CHECK(run_cli("validate", args_for(kData + "/missing.json")).exit_code == kExitSchema);
  CHECK_THROWS_AS(run_command("smith", {}, parse_dataset(kData + "/bad_relations.json")), UsageError);

  // A complex with d^2 != 0 is a validation failure, not a schema error.
  Report dd = run_cli("validate", args_for(temp_file("dd.json", R"({"version": 1, "kind": "floer",
    "generators": [{"label": "a"}, {"label": "b"}, {"label": "c"}],
    "differential": [["b", "a", "1"], ["c", "b", "1"]]})")));
  CHECK(dd.exit_code == kExitValidation);
}

TEST_CASE("localize on the canonical file", "[cli]") {
  Report rep = run_cli("localize", args_for(kData + "/canonical_trn2.json"));
  REQUIRE(rep.exit_code == kExitOk);
  Json m = machine_part(rep.text());
  CHECK(m["localized"]["check"] == m["localized"]["bar"]);
  CHECK(m["localized"]["check"] == 1);
  CHECK(m["localized"]["hat"] == 0);
  CHECK(m["ranks_equal"] == true);
}

TEST_CASE("blocks emits a dataset", "[cli]") {
  CommandArgs args = args_for("Binfty");
  args.window = 5;
  Report rep = run_cli("blocks", args);
  REQUIRE(rep.exit_code == kExitOk);
  REQUIRE(rep.document);
  Dataset ds = parse_dataset_text(*rep.document);
  const auto& z = std::get<Z2ComplexData>(ds.body);
  CHECK(z.labels.size() == 11);
  CHECK(emit_dataset(ds) == *rep.document);
  CHECK(emit_dataset(Dataset{{}, complex_data(finite_type_blocks(BlockKind::Binfty, 5))}) == *rep.document);

  CliEnvironment env;
  env.window = 3;
  Report from_env = run_cli("blocks", args_for("Binfty"), env);
  CHECK(std::get<Z2ComplexData>(parse_dataset_text(*from_env.document).body).labels.size() == 7);
  CHECK(run_cli("blocks", args_for("B7")).exit_code == kExitSchema);

  CommandArgs to_file = args_for("Bplus");
  to_file.window = 4;
  to_file.out = temp_file("bplus.json", "");
  Report written = run_cli("blocks", to_file);
  CHECK_FALSE(written.document);
  CHECK(std::get<Z2ComplexData>(parse_dataset(*to_file.out).body).labels.size() == 4);
}

TEST_CASE("every command runs on a shipped file", "[cli]") {
  struct Case {
    const char* command;
    const char* file;
  };
  const Case cases[] = {{"validate", "canonical_equivariant2.json"}, {"homology", "canonical_equivariant2.json"},
                        {"km", "canonical_trn2.json"},               {"twisted", "canonical_equivariant2.json"},
                        {"localize", "canonical_equivariant2.json"}, {"steenrod", "floer_small.json"},
                        {"kunneth", "two_point_porteous.json"},      {"ss-compare", "point_pair.json"},
                        {"smith", "canonical_equivariant2.json"},    {"porteous", "two_point_porteous.json"},
                        {"homology", "floer_small.json"}};
  for (const auto& c : cases) {
    INFO(c.command << " " << c.file);
    CommandArgs args = args_for(kData + "/" + c.file);
    args.truncate = 2;
    Report rep = run_cli(c.command, args);
    CHECK(rep.exit_code == kExitOk);
    Json m = machine_part(rep.text());
    CHECK(m["command"] == c.command);
    CHECK(m["ok"] == true);
  }
}

TEST_CASE("reports are deterministic", "[cli]") {
  for (const char* cmd : {"localize", "km", "homology"}) {
    CommandArgs args = args_for(kData + "/canonical_trn2.json");
    CHECK(run_cli(cmd, args).text() == run_cli(cmd, args).text());
  }
  CommandArgs args = args_for(kData + "/canonical_equivariant2.json");
  args.window = 5;
  Report a = run_cli("localize", args), b = run_cli("localize", args);
  CHECK(a.text() == b.text());
  CHECK(machine_part(a.text())["arguments"]["window"] == 5);
  // Timing goes to the human section only.
  CliEnvironment verbose;
  verbose.verbosity = 1;
  Report t = run_cli("localize", args, verbose);
  CHECK_THAT(t.human, Catch::Matchers::ContainsSubstring("time:"));
  CHECK(t.machine == a.machine);
}

TEST_CASE("Kunneth report on twisted data", "[cli][property]") {
  gen::Rng rng(72);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset td{{}, TwistedData{gen::random_twisted(rng, 5), std::nullopt}};
    Report rep = run_command("kunneth", {}, td);
    CHECK(rep.exit_code == kExitOk);
  }
  Dataset block{{}, complex_data(finite_type_blocks(BlockKind::Bplus, 3))};
  CHECK(run_command("kunneth", {}, block).exit_code == kExitOk);
}
