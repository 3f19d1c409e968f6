#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "pcs/pipeline.hpp"
#include "pcs/store.hpp"
#include "support/fixtures.hpp"

using namespace pcs;
using nlohmann::json;

namespace {

store::SummaryStore service_store() { return pipeline::summarize(fixtures::load({"servicefw.ir"})).store; }

std::string error_of(const std::string& text) {
  try {
    store::parse(text);
  } catch (const store::StoreError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Store, MatchesCommittedGoldenBytes) { EXPECT_EQ(store::dump(service_store()), fixtures::read("servicefw.pcs.json")); }

TEST(Store, RoundTripsEveryFixture) {
  for (const auto& set : std::vector<std::vector<std::string>>{
           {"servicefw.ir"}, {"loaderfw.ir"}, {"textviewfw.ir"}, {"layoutfw.ir"}}) {
    auto s = pipeline::summarize(fixtures::load(set)).store;
    auto back = store::parse(store::dump(s));
    EXPECT_EQ(back.summaries, s.summaries) << set.front();
    EXPECT_EQ(store::dump(back), store::dump(s));
  }
}

TEST(Store, EmptyStoreRoundTrips) {
  store::SummaryStore s;
  auto text = store::dump(s);
  auto j = json::parse(text);
  EXPECT_EQ(j["version"], 1);
  EXPECT_TRUE(j["summaries"].empty());
  EXPECT_TRUE(store::parse(text).summaries.empty());
}

TEST(Store, ReceiverEncoding) {
  auto j = json::parse(store::dump(service_store()));
  const auto& destroy = j["summaries"]["ContextImpl.unbindService/1"]["nodes"][3];
  ASSERT_EQ(destroy["kind"], "callback");
  EXPECT_EQ(destroy["callback"]["receivers"], json::parse(R"([{"kind":"param","index":0,"path":[]}])"));
}

TEST(Store, MissingNodesFieldNamesTheSummary) {
  auto j = json::parse(store::dump(service_store()));
  j["summaries"]["ContextImpl.startService/1"].erase("nodes");
  EXPECT_EQ(error_of(j.dump()), "missing field nodes in summary ContextImpl.startService/1");
}

TEST(Store, RejectsOtherVersionsAndMalformedJson) {
  auto j = json::parse(store::dump(service_store()));
  j["version"] = 2;
  EXPECT_NE(error_of(j.dump()).find("version"), std::string::npos);
  EXPECT_NE(error_of("{ not json").find("malformed JSON"), std::string::npos);
}

TEST(Store, SaveAndLoadFiles) {
  auto path = (std::filesystem::temp_directory_path() / "pcs_store_test.json").string();
  auto s = service_store();
  store::save_store(s, path);
  EXPECT_EQ(store::load_store(path).summaries, s.summaries);
  std::remove(path.c_str());
  EXPECT_THROW(store::load_store(path), std::runtime_error);
}

TEST(Store, MetadataRecordsBounds) {
  pipeline::SummarizeOptions opt;
  opt.bounds.max_len = 7;
  opt.bounds.max_callers = 3;
  opt.bounds.seed = 11;
  auto j = json::parse(store::dump(pipeline::summarize(fixtures::load({"servicefw.ir"}), opt).store));
  EXPECT_EQ(j["metadata"]["max_chain"], 7);
  EXPECT_EQ(j["metadata"]["max_callers"], 3);
  EXPECT_EQ(j["metadata"]["seed"], 11);
  EXPECT_EQ(j["metadata"]["tool_version"], "pcs 1.0.0");
}
