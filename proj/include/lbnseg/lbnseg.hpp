/* Copyright 2026 The lbnseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header.

#ifndef LBNSEG_LBNSEG_HPP_
#define LBNSEG_LBNSEG_HPP_

#include "lbnseg/analysis/footprint.hpp"
#include "lbnseg/analysis/gridding.hpp"
#include "lbnseg/analysis/profile.hpp"
#include "lbnseg/analysis/receptive_field.hpp"
#include "lbnseg/analysis/report.hpp"
#include "lbnseg/blocks.hpp"
#include "lbnseg/error.hpp"
#include "lbnseg/executor.hpp"
#include "lbnseg/fold.hpp"
#include "lbnseg/graph.hpp"
#include "lbnseg/io/palette.hpp"
#include "lbnseg/io/ppm.hpp"
#include "lbnseg/io/weight_file.hpp"
#include "lbnseg/kernels/activation.hpp"
#include "lbnseg/kernels/batchnorm.hpp"
#include "lbnseg/kernels/conv.hpp"
#include "lbnseg/kernels/gemm.hpp"
#include "lbnseg/kernels/linear.hpp"
#include "lbnseg/kernels/pooling.hpp"
#include "lbnseg/kernels/resize.hpp"
#include "lbnseg/network.hpp"
#include "lbnseg/tensor.hpp"
#include "lbnseg/verify.hpp"
#include "lbnseg/weights.hpp"

#endif  // LBNSEG_LBNSEG_HPP_
