#pragma once

namespace yaware {

// Subcommand grammar:
//   yaware <gen-data|pretrain|probe|finetune|ablate-sigma|plot-data>
//          --config <path> --out <dir> [--seed N] [--sigma X]
//          [--transforms crop|cutout|all_tf]
// ablate-sigma also accepts --grid as an alias for --config. Exit 0 on
// success, 1 on validation/usage errors, 2 on runtime or numeric errors.
// Every run writes <out>/run_metadata.json (config echo, seed, versions,
// wall-clock); no subcommand writes outside --out.
int dispatch(int argc, const char* const* argv);

}  // namespace yaware
