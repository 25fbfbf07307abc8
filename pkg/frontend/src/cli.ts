import { KINDS, PlotKind, render } from "./plots.js";

const USAGE = `usage: plot <kind> <inputs...> -o <file>
kinds: ${KINDS.join(", ")}`;

export function main(argv: string[]): number {
  const positional: string[] = [];
  let output: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i]!;
    if (a === "-o" || a === "--output") {
      output = argv[i + 1];
      i++;
    } else if (a === "-h" || a === "--help") {
      console.log(USAGE);
      return 0;
    } else {
      positional.push(a);
    }
  }
  const [kind, ...inputs] = positional;
  if (kind === undefined || output === undefined || inputs.length === 0) {
    console.error(USAGE);
    return 2;
  }
  if (!(KINDS as readonly string[]).includes(kind)) {
    console.error(`error: unknown plot kind "${kind}"\n${USAGE}`);
    return 2;
  }
  try {
    render({ kind: kind as PlotKind, inputs, output });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}
