/*
 * Copyright 2026 The SANA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "sana/autograd.hpp"
#include "sana/checkpoint.hpp"
#include "sana/common.hpp"
#include "sana/config.hpp"
#include "sana/constrained_decoder.hpp"
#include "sana/edit_oracle.hpp"
#include "sana/gradcheck.hpp"
#include "sana/layers.hpp"
#include "sana/metrics.hpp"
#include "sana/model_io.hpp"
#include "sana/optim.hpp"
#include "sana/pointer.hpp"
#include "sana/realizer.hpp"
#include "sana/skeleton.hpp"
#include "sana/synth.hpp"
#include "sana/table.hpp"
#include "sana/table_encoder.hpp"
#include "sana/train.hpp"
