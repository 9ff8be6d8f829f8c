//! Lex a file with a lexer specification and print each token with its position.

use lrrepair::fixtures;
use lrrepair::lexer::line_col;

fn main() {
    let lang = fixtures::minijava();
    let src = "class Point {\n  int x, y = 1 + z;\n}\n";
    for t in lang.lex(src).unwrap() {
        let (line, col) = line_col(src, t.span.start);
        println!(
            "{:>2}:{:<3} {:<6} {:?}",
            line,
            col,
            lang.grammar.token_name(t.kind),
            t.lexeme(src).unwrap_or("")
        );
    }
}
