use lrmt_core::metrics::tokenize_13a;

#[test]
fn golden_sentences() {
    let golden = include_str!("data/tokenize_golden.tsv");
    let mut checked = 0;
    for (line_no, line) in golden.lines().enumerate() {
        let (input, expected) = line.split_once('\t').expect("two columns");
        let got = tokenize_13a(input).tokens().join(" ");
        assert_eq!(got, expected, "line {}: {input:?}", line_no + 1);
        checked += 1;
    }
    assert_eq!(checked, 30);
}
