// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "quadpool/augment.hpp"
#include "quadpool/bench.hpp"
#include "quadpool/checkpoint.hpp"
#include "quadpool/classifier.hpp"
#include "quadpool/dataset.hpp"
#include "quadpool/error.hpp"
#include "quadpool/eval.hpp"
#include "quadpool/geometry.hpp"
#include "quadpool/image.hpp"
#include "quadpool/parallel.hpp"
#include "quadpool/pipeline.hpp"
#include "quadpool/pooling.hpp"
#include "quadpool/rng.hpp"
#include "quadpool/synth.hpp"
#include "quadpool/train.hpp"
