#include <string>

#include <gtest/gtest.h>

#include "tlaw/io.hpp"

using namespace tlaw;

TEST(Csv, WideRoundTrip) {
    const Panel p = Panel::from_rows({{0, 1, 2}, {3, 4, 5}}, {"a", "b"}, {"x", "y", "z"});
    const std::string text = write_csv(p);
    EXPECT_EQ(parse_csv(text, Layout::wide), p);
}

TEST(Csv, RoundTripIsBitExact) {
    const Panel p = Panel::from_rows({{0.1, 1.0 / 3.0, 2e-300}, {3.14159265358979, 4e300, 5.5}});
    const Panel q = parse_csv(write_csv(p), Layout::wide);
    for (std::size_t k = 0; k < p.values().size(); ++k) EXPECT_EQ(p.values()[k], q.values()[k]);
    EXPECT_EQ(parse_csv(write_csv(p, Layout::long_format), Layout::long_format).values(), p.values());
}

TEST(Csv, LongEqualsWide) {
    const std::string wide = "site,t1,t2,t3\nA,0,1,2\nB,3,4,5\n";
    const std::string lng = "time,site,value\nt1,A,0\nt1,B,3\nt2,A,1\nt2,B,4\nt3,B,5\nt3,A,2\n";
    EXPECT_EQ(parse_csv(wide, Layout::wide), parse_csv(lng, Layout::long_format));
}

TEST(Csv, NoHeaderAndDelimiter) {
    const Panel p = parse_csv("1;2\n3;4\n", Layout::wide, ';', false);
    EXPECT_EQ(p(1, 0), 3.0);
    EXPECT_TRUE(p.site_labels().empty());
}

TEST(Csv, CommentsAndBlankLinesSkipped) {
    const Panel p = parse_csv("# note\nsite,a,b\n\ns1,1,2\ns2,3,4\n", Layout::wide);
    EXPECT_EQ(p.n_sites(), 2u);
}

TEST(Csv, NegativeValueNamesCell) {
    try {
        parse_csv("site,a,b\ns1,1,2\ns2,-1,4\n", Layout::wide);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse);
        EXPECT_NE(std::string(e.what()).find("line 3, column 2"), std::string::npos);
    }
}

TEST(Csv, Rejections) {
    EXPECT_THROW(parse_csv("site,a,b\ns1,1,2\ns2,3\n", Layout::wide), Error);
    EXPECT_THROW(parse_csv("site,a,b\ns1,1,x\ns2,3,4\n", Layout::wide), Error);
    EXPECT_THROW(parse_csv("site,a,b\ns1,1,inf\ns2,3,4\n", Layout::wide), Error);
    EXPECT_THROW(parse_csv("", Layout::wide), Error);
    EXPECT_THROW(parse_csv("site,time\nA,1\n", Layout::long_format), Error);
    EXPECT_THROW(parse_csv("site,time,value\nA,1,2\nA,1,3\nB,1,1\nB,2,1\n", Layout::long_format), Error);
}

TEST(Csv, MissingLongCellsListed) {
    try {
        parse_csv("site,time,value\nA,1,2\nA,2,3\nB,1,1\n", Layout::long_format);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("(B, 2)"), std::string::npos);
    }
}

TEST(Output, FormatAndHash) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
}
