"""Regenerate src/bytedoc/data/ercdoc.tsv from the phrase table below.

Phrases paraphrase the interface descriptions in the ERC-20, ERC-165,
ERC-721 and ERC-1155 standards.
"""

from pathlib import Path

from bytedoc.sigdb import SigDatabase

PHRASES = {
    # ERC-20
    "name()": "Returns the name of the token.",
    "symbol()": "Returns the symbol of the token.",
    "decimals()": "Returns the number of decimals the token uses.",
    "totalSupply()": "Total supply of tokens.",
    "balanceOf(address)": "Returns the account balance of another account.",
    "transfer(address,uint256)": "Transfers tokens to an address and fires the Transfer event.",
    "transferFrom(address,address,uint256)": "Transfers tokens from one address to another on behalf of the owner.",
    "approve(address,uint256)": "Allows a spender to withdraw from your account multiple times, up to an amount.",
    "allowance(address,address)": "Returns the amount which a spender is still allowed to withdraw from an owner.",
    # ERC-165
    "supportsInterface(bytes4)": "Queries if a contract implements an interface.",
    # ERC-721
    "ownerOf(uint256)": "Finds the owner of an NFT.",
    "safeTransferFrom(address,address,uint256)": "Transfers the ownership of an NFT from one address to another address.",
    "safeTransferFrom(address,address,uint256,bytes)": "Transfers the ownership of an NFT from one address to another address with extra data.",
    "setApprovalForAll(address,bool)": "Enables or disables approval for a third party to manage all of your assets.",
    "getApproved(uint256)": "Gets the approved address for a single NFT.",
    "isApprovedForAll(address,address)": "Queries if an address is an authorized operator for another address.",
    "tokenURI(uint256)": "Returns a distinct Uniform Resource Identifier for a given asset.",
    "tokenByIndex(uint256)": "Enumerates valid NFTs.",
    "tokenOfOwnerByIndex(address,uint256)": "Enumerates NFTs assigned to an owner.",
    # ERC-1155
    "balanceOfBatch(address[],uint256[])": "Returns the balance of multiple account and token pairs.",
    "safeBatchTransferFrom(address,address,uint256[],uint256[],bytes)": "Transfers amounts of several token types from one address to another.",
    "uri(uint256)": "Returns the URI for a token type.",
}


def main() -> None:
    db = SigDatabase()
    for sig, phrase in PHRASES.items():
        db.add(sig, "ercdoc", phrase, weight=1.0)
    out = Path(__file__).resolve().parents[1] / "src" / "bytedoc" / "data" / "ercdoc.tsv"
    out.write_text(db.dumps(), encoding="utf-8")
    print(f"wrote {len(db)} records to {out}")


if __name__ == "__main__":
    main()
