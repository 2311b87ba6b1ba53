/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, The IER Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ier/embedder.hpp"
#include "ier/errors.hpp"

using namespace ier;

TEST(HashingEmbedder, DeterministicUnitVectors) {
    HashingEmbedder e(256);
    const auto a = e.embed("print the sum of two numbers");
    const auto b = e.embed("print the sum of two numbers");
    EXPECT_EQ(a, b);
    EXPECT_NEAR(cosine(a, b), 1.0, 1e-12);
    EXPECT_NEAR(std::sqrt(dot(a, a)), 1.0, 1e-12);
    for (double x : a) EXPECT_GE(x, 0.0);
}

TEST(HashingEmbedder, BlankTextIsInvalid) {
    HashingEmbedder e;
    EXPECT_THROW(e.embed(""), InvalidArgument);
    EXPECT_THROW(e.embed(" \n\t"), InvalidArgument);
}

TEST(HashingEmbedder, Tokenizer) {
    EXPECT_EQ(HashingEmbedder::tokenize("Print(x_1, 2)"),
              (std::vector<std::string>{"print", "(", "x_1", ",", "2", ")"}));
}

// Pick words until each text occupies buckets the other never touches.
TEST(HashingEmbedder, BucketDisjointTextsAreOrthogonal) {
    HashingEmbedder e(64, 3);
    std::string left, right;
    std::set<std::size_t> left_buckets;
    for (int i = 0; i < 200 && left_buckets.size() < 4; ++i) {
        const auto w = "alpha" + std::to_string(i);
        left_buckets.insert(e.bucket_of(w));
        left += w + " ";
    }
    int added = 0;
    for (int i = 0; i < 200 && added < 4; ++i) {
        const auto w = "omega" + std::to_string(i);
        if (left_buckets.count(e.bucket_of(w))) continue;
        right += w + " ";
        ++added;
    }
    ASSERT_EQ(added, 4);
    EXPECT_EQ(cosine(e.embed(left), e.embed(right)), 0.0);
}

TEST(HashingEmbedder, SeedChangesBuckets) {
    HashingEmbedder a(1024, 1), b(1024, 2);
    int differ = 0;
    for (int i = 0; i < 20; ++i) differ += a.bucket_of("w" + std::to_string(i)) != b.bucket_of("w" + std::to_string(i));
    EXPECT_GT(differ, 10);
}

TEST(Vectors, CosineAndNormalize) {
    EXPECT_EQ(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}), 0.0);
    Embedding v{3, 4};
    normalize(v);
    EXPECT_DOUBLE_EQ(v[0], 0.6);
    EXPECT_DOUBLE_EQ(v[1], 0.8);
    Embedding z{0, 0};
    EXPECT_THROW(normalize(z), InvalidArgument);
}
