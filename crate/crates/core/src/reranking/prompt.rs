/// The model input for one query-passage pair. Both texts are inserted
/// verbatim.
pub fn render_prompt(query: &str, passage: &str) -> String {
    format!("Query: {query} Document: {passage} Relevant:")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template() {
        assert_eq!(render_prompt("who?", "a doc"), "Query: who? Document: a doc Relevant:");
        assert_eq!(render_prompt("", ""), "Query:  Document:  Relevant:");
    }

    #[test]
    fn no_escaping() {
        assert_eq!(
            render_prompt("Document: x", "y"),
            "Query: Document: x Document: y Relevant:"
        );
    }
}
